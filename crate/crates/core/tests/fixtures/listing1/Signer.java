import java.security.PrivateKey;
import java.security.Signature;

public class Signer {
private byte[] signByte(byte[] dataToSign){
   byte[] signedBytes;
   Signature s = Signature.getInstance("SHA1WithRSA");
   s.initSign(getPrivateKey());
   s.update(dataToSign);
   // no sign() before returning
   return signedBytes;
}

// key comes from a helper that builds a short key
private PrivateKey getPrivateKey() {
    return shortKey();
}
}

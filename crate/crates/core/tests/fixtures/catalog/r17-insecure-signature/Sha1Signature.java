import java.security.KeyPair;
import java.security.KeyPairGenerator;
import java.security.Signature;

public class Sha1Signature {
  byte[] sign(byte[] data) throws Exception {
    KeyPairGenerator g = KeyPairGenerator.getInstance("RSA");
    g.initialize(4096);
    KeyPair kp = g.generateKeyPair();
    Signature s = Signature.getInstance("SHA1withRSA");
    s.initSign(kp.getPrivate());
    s.update(data);
    return s.sign();
  }
}

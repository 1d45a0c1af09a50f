import java.security.KeyPair;
import java.security.KeyPairGenerator;
import java.security.Signature;

public class EmptySignature {
  byte[] sign() throws Exception {
    KeyPairGenerator g = KeyPairGenerator.getInstance("RSA");
    g.initialize(4096);
    KeyPair kp = g.generateKeyPair();
    Signature s = Signature.getInstance("SHA256withRSA");
    s.initSign(kp.getPrivate());
    return s.sign();
  }
}

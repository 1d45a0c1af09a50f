import java.security.KeyPair;
import java.security.KeyPairGenerator;
import javax.crypto.Cipher;

public class RsaDefault {
  byte[] encrypt(byte[] data) throws Exception {
    KeyPairGenerator g = KeyPairGenerator.getInstance("RSA");
    g.initialize(4096);
    KeyPair kp = g.generateKeyPair();
    Cipher c = Cipher.getInstance("RSA");
    c.init(Cipher.ENCRYPT_MODE, kp.getPublic());
    return c.doFinal(data);
  }
}

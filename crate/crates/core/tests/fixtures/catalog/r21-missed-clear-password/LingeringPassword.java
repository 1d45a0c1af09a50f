import java.security.SecureRandom;
import javax.crypto.spec.PBEKeySpec;

public class LingeringPassword {
  void derive(char[] password) {
    byte[] salt = new byte[16];
    SecureRandom r = new SecureRandom();
    r.nextBytes(salt);
    PBEKeySpec spec = new PBEKeySpec(password, salt, 65536, 256);
  }
}

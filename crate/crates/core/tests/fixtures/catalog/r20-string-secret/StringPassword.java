import java.security.SecureRandom;
import javax.crypto.spec.PBEKeySpec;

public class StringPassword {
  private String password = "hunter2";

  void derive() {
    byte[] salt = new byte[16];
    SecureRandom r = new SecureRandom();
    r.nextBytes(salt);
    String pw = password;
    PBEKeySpec spec = new PBEKeySpec(pw.toCharArray(), salt, 65536, 256);
    spec.clearPassword();
  }
}

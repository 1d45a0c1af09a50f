import javax.crypto.spec.PBEKeySpec;

public class FixedSalt {
  void derive(char[] password) {
    byte[] salt = "fixed-salt".getBytes();
    PBEKeySpec spec = new PBEKeySpec(password, salt, 65536, 256);
    spec.clearPassword();
  }
}

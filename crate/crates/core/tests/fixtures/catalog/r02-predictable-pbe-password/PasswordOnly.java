import javax.crypto.spec.PBEKeySpec;

public class PasswordOnly {
  void derive(char[] password) {
    PBEKeySpec spec = new PBEKeySpec(password);
    spec.clearPassword();
  }
}

import java.security.MessageDigest;

public class ChunkedDigest {
  void each(byte[] chunk, boolean more) throws Exception {
    MessageDigest md = MessageDigest.getInstance("SHA-512");
    while (more) {
      md.update(chunk);
      byte[] h = md.digest();
    }
  }
}

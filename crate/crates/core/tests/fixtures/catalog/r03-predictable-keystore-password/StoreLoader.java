import java.io.InputStream;
import java.security.KeyStore;

public class StoreLoader {
  KeyStore open(InputStream in) throws Exception {
    KeyStore ks = KeyStore.getInstance("PKCS12");
    ks.load(in, "changeit".toCharArray());
    return ks;
  }
}

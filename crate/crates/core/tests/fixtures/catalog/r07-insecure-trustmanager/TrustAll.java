import java.security.SecureRandom;
import javax.net.ssl.SSLContext;
import javax.net.ssl.SSLSocketFactory;
import javax.net.ssl.TrustManager;

public class TrustAll {
  SSLSocketFactory factory() throws Exception {
    TrustManager[] managers = new TrustManager[] { new AcceptAllManager() };
    SecureRandom random = new SecureRandom();
    SSLContext ctx = SSLContext.getInstance("TLSv1.3");
    ctx.init(null, managers, random);
    return ctx.getSocketFactory();
  }
}

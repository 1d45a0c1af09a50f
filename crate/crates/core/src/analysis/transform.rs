//! `algorithm/mode/padding` transformation strings as accepted by
//! `Cipher.getInstance`.

use serde::{Deserialize, Serialize};

use crate::rulelang::Component;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transformation {
    pub algorithm: String,
    pub mode: String,
    pub padding: String,
    /// Mode or padding was missing and filled with the provider default.
    pub defaulted: bool,
}

impl Transformation {
    pub fn component(&self, c: Component) -> &str {
        match c {
            Component::Algorithm => &self.algorithm,
            Component::Mode => &self.mode,
            Component::Padding => &self.padding,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedTransformation(pub String);

/// Mode and padding the default JCA providers pick when only the algorithm
/// is given.
fn provider_defaults(algorithm: &str) -> (&'static str, &'static str) {
    let a = algorithm.to_ascii_uppercase();
    if a == "RSA" {
        ("ECB", "PKCS1Padding")
    } else if a.starts_with("CHACHA20") || a == "RC4" || a == "ARCFOUR" {
        ("None", "NoPadding")
    } else {
        ("ECB", "PKCS5Padding")
    }
}

pub fn parse_transformation(spec: &str) -> Result<Transformation, MalformedTransformation> {
    let parts: Vec<&str> = spec.split('/').collect();
    if parts.len() > 3 {
        return Err(MalformedTransformation(format!(
            "`{spec}` has {} components (at most 3)",
            parts.len()
        )));
    }
    if parts.iter().any(|p| p.trim().is_empty()) {
        return Err(MalformedTransformation(format!("`{spec}` has an empty component")));
    }
    let algorithm = parts[0].trim().to_string();
    let (dm, dp) = provider_defaults(&algorithm);
    Ok(Transformation {
        mode: parts.get(1).map_or(dm, |s| s.trim()).to_string(),
        padding: parts.get(2).map_or(dp, |s| s.trim()).to_string(),
        defaulted: parts.len() < 3,
        algorithm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_spec_is_split() {
        let t = parse_transformation("AES/CBC/PKCS5Padding").unwrap();
        assert_eq!((t.algorithm.as_str(), t.mode.as_str(), t.padding.as_str()), ("AES", "CBC", "PKCS5Padding"));
        assert!(!t.defaulted);
    }

    #[test]
    fn bare_algorithm_gets_provider_defaults() {
        let t = parse_transformation("AES").unwrap();
        assert_eq!((t.mode.as_str(), t.padding.as_str()), ("ECB", "PKCS5Padding"));
        assert!(t.defaulted);
        let r = parse_transformation("RSA").unwrap();
        assert_eq!(r.padding, "PKCS1Padding");
        let p = parse_transformation("AES/GCM").unwrap();
        assert_eq!(p.padding, "PKCS5Padding");
        assert!(p.defaulted);
    }

    #[test]
    fn malformed_specs() {
        assert!(parse_transformation("AES//CBC").is_err());
        assert!(parse_transformation("AES/CBC/PKCS5Padding/X").is_err());
        assert!(parse_transformation("").is_err());
    }
}

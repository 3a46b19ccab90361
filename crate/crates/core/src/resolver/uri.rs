use std::fmt;

/// One `/`-separated URI segment, optionally carrying a 0-based `#k`
/// occurrence index among same-name siblings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    pub name: String,
    pub index: Option<usize>,
}

impl Segment {
    pub fn named(name: &str) -> Segment {
        Segment { name: name.to_string(), index: None }
    }

    pub fn indexed(name: &str, index: usize) -> Segment {
        Segment { name: name.to_string(), index: Some(index) }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(k) => write!(f, "{}#{k}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Uri {
    pub scheme: Option<String>,
    pub segments: Vec<Segment>,
}

impl fmt::Display for Uri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(scheme) = &self.scheme {
            write!(f, "{scheme}:")?;
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{seg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UriError {
    #[error("malformed URI `{uri}`: empty segment")]
    EmptySegment { uri: String },
    #[error("malformed URI `{uri}`: index `{index}` is not a number")]
    BadIndex { uri: String, index: String },
}

fn is_scheme(prefix: &str) -> bool {
    let mut chars = prefix.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '.' | '-'))
}

/// Split a binding URI into scheme and segments.
///
/// The scheme is the text before the first `:` when that text is a valid
/// scheme name without `/`; so `/xs:schema/xs:element#0` has no scheme. Up to
/// two leading slashes after the scheme (or at the start) are ignored. The
/// empty string denotes the workspace root.
pub fn parse_uri(uri: &str) -> Result<Uri, UriError> {
    let (scheme, rest) = match uri.split_once(':') {
        Some((prefix, rest)) if is_scheme(prefix) => (Some(prefix.to_string()), rest),
        _ => (None, uri),
    };
    let rest = rest.strip_prefix('/').unwrap_or(rest);
    let rest = rest.strip_prefix('/').unwrap_or(rest);
    let mut segments = Vec::new();
    if rest.is_empty() {
        return Ok(Uri { scheme, segments });
    }
    for raw in rest.split('/') {
        let (name, index) = match raw.rsplit_once('#') {
            Some((name, idx)) => {
                let k = idx
                    .parse::<usize>()
                    .map_err(|_| UriError::BadIndex { uri: uri.to_string(), index: idx.to_string() })?;
                (name, Some(k))
            }
            None => (raw, None),
        };
        if name.is_empty() {
            return Err(UriError::EmptySegment { uri: uri.to_string() });
        }
        segments.push(Segment { name: name.to_string(), index });
    }
    Ok(Uri { scheme, segments })
}

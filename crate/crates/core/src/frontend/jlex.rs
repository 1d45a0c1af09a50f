//! Tokenizer for the supported Java subset.

#[derive(Debug, Clone, PartialEq)]
pub enum JTok {
    Ident(String),
    Int(i64),
    /// Floating-point or out-of-range numeric literal; the value is not tracked.
    Number,
    Str(String),
    Char(char),
    /// Operator or separator, longest match (except `>`, see below).
    Op(&'static str),
    At,
}

#[derive(Debug, Clone)]
pub struct JToken {
    pub tok: JTok,
    pub line: u32,
    pub col: u32,
    /// Offset of the first char; used to detect adjacent `>` tokens.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

// `>` is always emitted alone (so `List<List<X>>` closes cleanly); the
// expression parser reassembles shifts from adjacent `>` tokens.
const OPS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".", "=", "<",
    ">", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

pub fn tokenize(src: &str) -> Result<Vec<JToken>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    let err = |line, col, message: &str| LexError {
        line,
        col,
        message: message.to_string(),
    };

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc, start) = (line, col, i);
        let advance = |n: usize, i: &mut usize, line: &mut u32, col: &mut u32| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
                *i += 1;
            }
        };

        if c.is_whitespace() || c == '\u{feff}' {
            advance(1, &mut i, &mut line, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i, &mut line, &mut col);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(2, &mut i, &mut line, &mut col);
            loop {
                if i >= chars.len() {
                    return Err(err(tl, tc, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(2, &mut i, &mut line, &mut col);
                    break;
                }
                advance(1, &mut i, &mut line, &mut col);
            }
            continue;
        }
        if c == '"' {
            let text_block = chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"');
            let mut s = String::new();
            if text_block {
                advance(3, &mut i, &mut line, &mut col);
                // content starts after the line terminator following `"""`
                while i < chars.len() && chars[i] != '\n' {
                    advance(1, &mut i, &mut line, &mut col);
                }
                if i < chars.len() {
                    advance(1, &mut i, &mut line, &mut col);
                }
                loop {
                    if i >= chars.len() {
                        return Err(err(tl, tc, "unterminated text block"));
                    }
                    if chars[i] == '"' && chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"') {
                        advance(3, &mut i, &mut line, &mut col);
                        break;
                    }
                    if chars[i] == '\\' && i + 1 < chars.len() {
                        s.push(unescape(chars[i + 1]));
                        advance(2, &mut i, &mut line, &mut col);
                        continue;
                    }
                    s.push(chars[i]);
                    advance(1, &mut i, &mut line, &mut col);
                }
                out.push(JToken { tok: JTok::Str(strip_indent(&s)), line: tl, col: tc, offset: start });
                continue;
            }
            advance(1, &mut i, &mut line, &mut col);
            loop {
                if i >= chars.len() || chars[i] == '\n' {
                    return Err(err(tl, tc, "unterminated string literal"));
                }
                let ch = chars[i];
                if ch == '"' {
                    advance(1, &mut i, &mut line, &mut col);
                    break;
                }
                if ch == '\\' {
                    let (v, n) = escape_at(&chars, i).ok_or_else(|| err(line, col, "bad escape"))?;
                    s.push(v);
                    advance(n, &mut i, &mut line, &mut col);
                    continue;
                }
                s.push(ch);
                advance(1, &mut i, &mut line, &mut col);
            }
            out.push(JToken { tok: JTok::Str(s), line: tl, col: tc, offset: start });
            continue;
        }
        if c == '\'' {
            advance(1, &mut i, &mut line, &mut col);
            let v = match chars.get(i) {
                Some('\\') => {
                    let (v, n) = escape_at(&chars, i).ok_or_else(|| err(line, col, "bad escape"))?;
                    advance(n, &mut i, &mut line, &mut col);
                    v
                }
                Some(&ch) if ch != '\n' => {
                    advance(1, &mut i, &mut line, &mut col);
                    ch
                }
                _ => return Err(err(tl, tc, "unterminated char literal")),
            };
            if chars.get(i) != Some(&'\'') {
                return Err(err(tl, tc, "unterminated char literal"));
            }
            advance(1, &mut i, &mut line, &mut col);
            out.push(JToken { tok: JTok::Char(v), line: tl, col: tc, offset: start });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut j = i;
            while j < chars.len()
                && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '.'
                    || ((chars[j] == '+' || chars[j] == '-')
                        && matches!(chars[j - 1], 'e' | 'E' | 'p' | 'P')
                        && !chars[i..j].iter().any(|c| *c == 'x' || *c == 'X')))
            {
                j += 1;
            }
            let text: String = chars[i..j].iter().filter(|c| **c != '_').collect();
            advance(j - i, &mut i, &mut line, &mut col);
            out.push(JToken { tok: parse_number(&text), line: tl, col: tc, offset: start });
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '$' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                s.push(chars[i]);
                advance(1, &mut i, &mut line, &mut col);
            }
            out.push(JToken { tok: JTok::Ident(s), line: tl, col: tc, offset: start });
            continue;
        }
        if c == '@' {
            advance(1, &mut i, &mut line, &mut col);
            out.push(JToken { tok: JTok::At, line: tl, col: tc, offset: start });
            continue;
        }
        let op = OPS.iter().find(|op| {
            let n = op.chars().count();
            i + n <= chars.len() && chars[i..i + n].iter().copied().eq(op.chars())
        });
        match op {
            Some(op) => {
                advance(op.len(), &mut i, &mut line, &mut col);
                out.push(JToken { tok: JTok::Op(op), line: tl, col: tc, offset: start });
            }
            None => return Err(err(tl, tc, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

fn unescape(c: char) -> char {
    match c {
        'n' => '\n',
        't' => '\t',
        'r' => '\r',
        'b' => '\u{8}',
        'f' => '\u{c}',
        's' => ' ',
        '0' => '\0',
        other => other,
    }
}

/// Decode the escape sequence at `chars[i] == '\\'`; returns the char and
/// the number of source chars consumed.
fn escape_at(chars: &[char], i: usize) -> Option<(char, usize)> {
    let next = *chars.get(i + 1)?;
    if next == 'u' {
        let mut j = i + 1;
        while chars.get(j) == Some(&'u') {
            j += 1;
        }
        let hex: String = chars.get(j..j + 4)?.iter().collect();
        let v = u32::from_str_radix(&hex, 16).ok()?;
        return Some((char::from_u32(v).unwrap_or('\u{fffd}'), j + 4 - i));
    }
    if ('0'..='7').contains(&next) {
        let mut j = i + 1;
        let mut v = 0u32;
        while j < i + 4 && chars.get(j).is_some_and(|d| ('0'..='7').contains(d)) {
            v = v * 8 + chars[j].to_digit(8)?;
            j += 1;
        }
        return Some((char::from_u32(v)?, j - i));
    }
    Some((unescape(next), 2))
}

fn strip_indent(s: &str) -> String {
    let lines: Vec<&str> = s.split('\n').collect();
    let indent = lines
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start().len())
        .min()
        .unwrap_or(0);
    lines
        .iter()
        .map(|l| if l.len() >= indent { &l[indent..] } else { l.trim_start() })
        .collect::<Vec<_>>()
        .join("\n")
}

fn parse_number(text: &str) -> JTok {
    let t = text.trim_end_matches(['l', 'L']);
    let parsed = if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        i64::from_str_radix(h, 16).ok()
    } else if let Some(b) = t.strip_prefix("0b").or_else(|| t.strip_prefix("0B")) {
        i64::from_str_radix(b, 2).ok()
    } else if t.len() > 1 && t.starts_with('0') && t.chars().all(|c| c.is_ascii_digit()) {
        i64::from_str_radix(&t[1..], 8).ok()
    } else if t.chars().all(|c| c.is_ascii_digit()) {
        t.parse().ok()
    } else {
        None
    };
    parsed.map(JTok::Int).unwrap_or(JTok::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<JTok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn literals() {
        assert_eq!(
            toks(r#"x = "a\"b" + 'c' + 10_000 + 0x1F + 1.5f;"#),
            vec![
                JTok::Ident("x".into()),
                JTok::Op("="),
                JTok::Str("a\"b".into()),
                JTok::Op("+"),
                JTok::Char('c'),
                JTok::Op("+"),
                JTok::Int(10000),
                JTok::Op("+"),
                JTok::Int(31),
                JTok::Op("+"),
                JTok::Number,
                JTok::Op(";"),
            ]
        );
    }

    #[test]
    fn generics_close_with_single_angles() {
        assert_eq!(
            toks("Map<String, List<X>> m;")
                .iter()
                .filter(|t| **t == JTok::Op(">"))
                .count(),
            2
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// c\n  /* x\n */ foo").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].line, t[0].col), (3, 5));
    }

    #[test]
    fn unterminated_string_is_an_error() {
        assert!(tokenize("\"abc\n\"").is_err());
    }
}

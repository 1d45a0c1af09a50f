use super::error::{Pos, RuleError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Define,
    Pipe,
    Question,
    Star,
    Plus,
    AtLeast,
    Dot,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Int(i) => format!("integer {i}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Define => "`:=`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Question => "`?`".into(),
            Tok::Star => "`*`".into(),
            Tok::Plus => "`+`".into(),
            Tok::AtLeast => "`>=`".into(),
            Tok::Dot => "`.`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, RuleError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars[i];
            i += 1;
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() || chars[i] == '\n' {
                    return Err(RuleError::syntax(pos, &["closing `\"`"], "end of line"));
                }
                let c = bump!();
                match c {
                    '"' => break,
                    '\\' if i < chars.len() => s.push(bump!()),
                    _ => s.push(c),
                }
            }
            out.push(Spanned { tok: Tok::Str(s), pos });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                let d = bump!();
                if d != '_' {
                    s.push(d);
                }
            }
            let v = s
                .parse::<i64>()
                .map_err(|_| RuleError::syntax(pos, &["integer"], &s))?;
            out.push(Spanned { tok: Tok::Int(v), pos });
            continue;
        }
        if c == '<' {
            // only `<init>` is a valid token starting with `<`
            let rest: String = chars[i..].iter().take(6).collect();
            if rest == "<init>" {
                for _ in 0..6 {
                    bump!();
                }
                out.push(Spanned { tok: Tok::Ident("<init>".into()), pos });
                continue;
            }
            return Err(RuleError::syntax(pos, &["`<init>`"], "`<`"));
        }
        if is_ident_start(c) {
            let mut s = String::new();
            while i < chars.len() && is_ident_part(chars[i]) {
                s.push(bump!());
            }
            out.push(Spanned { tok: Tok::Ident(s), pos });
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '|' => Tok::Pipe,
            '?' => Tok::Question,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '.' => Tok::Dot,
            ':' => {
                if chars.get(i + 1) == Some(&'=') {
                    bump!();
                    Tok::Define
                } else {
                    Tok::Colon
                }
            }
            '>' if chars.get(i + 1) == Some(&'=') => {
                bump!();
                Tok::AtLeast
            }
            other => {
                return Err(RuleError::syntax(pos, &["token"], &format!("`{other}`")));
            }
        };
        bump!();
        out.push(Spanned { tok, pos });
    }
    Ok(out)
}

/// Cursor over a token slice with error helpers.
pub struct Cursor<'a> {
    toks: &'a [Spanned],
    idx: usize,
    eof: Pos,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Spanned], eof: Pos) -> Self {
        Cursor { toks, idx: 0, eof }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.idx).map(|s| &s.tok)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.idx).map(|s| s.pos).unwrap_or(self.eof)
    }

    pub fn next(&mut self) -> Option<&'a Spanned> {
        let t = self.toks.get(self.idx);
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn found(&self) -> String {
        self.peek()
            .map(Tok::describe)
            .unwrap_or_else(|| "end of input".into())
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Pos, RuleError> {
        let pos = self.pos();
        if self.eat(tok) {
            Ok(pos)
        } else {
            Err(RuleError::syntax(pos, &[&tok.describe()], &self.found()))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<(String, Pos), RuleError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.idx += 1;
                Ok((s.clone(), pos))
            }
            _ => Err(RuleError::syntax(pos, &[what], &self.found())),
        }
    }

    pub fn int(&mut self) -> Result<(i64, Pos), RuleError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Int(v)) => {
                self.idx += 1;
                Ok((*v, pos))
            }
            _ => Err(RuleError::syntax(pos, &["integer"], &self.found())),
        }
    }
}

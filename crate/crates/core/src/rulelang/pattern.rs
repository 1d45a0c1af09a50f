use std::collections::BTreeSet;
use std::fmt;

use super::error::{Pos, RuleError};
use super::lexer::{tokenize, Cursor, Tok};

/// Regular call-order expression over event labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OrderPattern {
    Event(String),
    Seq(Vec<OrderPattern>),
    Alt(Vec<OrderPattern>),
    Opt(Box<OrderPattern>),
    Star(Box<OrderPattern>),
    Plus(Box<OrderPattern>),
}

impl OrderPattern {
    pub fn event(label: &str) -> Self {
        OrderPattern::Event(label.to_string())
    }

    /// Parse a stand-alone pattern such as `getInstance (update+ digest)+`.
    pub fn parse(text: &str) -> Result<OrderPattern, RuleError> {
        let toks = tokenize(text)?;
        let eof = Pos {
            line: text.lines().count().max(1),
            col: text.lines().last().map(|l| l.len() + 1).unwrap_or(1),
        };
        let mut cur = Cursor::new(&toks, eof);
        let p = parse_alt(&mut cur, &[])?;
        if !cur.at_end() {
            return Err(RuleError::syntax(cur.pos(), &["end of pattern"], &cur.found()));
        }
        Ok(p)
    }

    /// Every label mentioned in the pattern.
    pub fn labels(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut BTreeSet<String>) {
        match self {
            OrderPattern::Event(l) => {
                out.insert(l.clone());
            }
            OrderPattern::Seq(ps) | OrderPattern::Alt(ps) => {
                ps.iter().for_each(|p| p.collect_labels(out));
            }
            OrderPattern::Opt(p) | OrderPattern::Star(p) | OrderPattern::Plus(p) => {
                p.collect_labels(out)
            }
        }
    }

    /// Replace every label for which `f` returns a list with the alternation
    /// of that list.
    pub fn expand(&self, f: &dyn Fn(&str) -> Option<Vec<String>>) -> OrderPattern {
        match self {
            OrderPattern::Event(l) => match f(l) {
                Some(members) if members.len() == 1 => OrderPattern::Event(members[0].clone()),
                Some(members) => {
                    OrderPattern::Alt(members.into_iter().map(OrderPattern::Event).collect())
                }
                None => self.clone(),
            },
            OrderPattern::Seq(ps) => OrderPattern::Seq(ps.iter().map(|p| p.expand(f)).collect()),
            OrderPattern::Alt(ps) => OrderPattern::Alt(ps.iter().map(|p| p.expand(f)).collect()),
            OrderPattern::Opt(p) => OrderPattern::Opt(Box::new(p.expand(f))),
            OrderPattern::Star(p) => OrderPattern::Star(Box::new(p.expand(f))),
            OrderPattern::Plus(p) => OrderPattern::Plus(Box::new(p.expand(f))),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            OrderPattern::Event(_) => 1,
            OrderPattern::Seq(ps) | OrderPattern::Alt(ps) => {
                1 + ps.iter().map(|p| p.depth()).max().unwrap_or(0)
            }
            OrderPattern::Opt(p) | OrderPattern::Star(p) | OrderPattern::Plus(p) => 1 + p.depth(),
        }
    }
}

impl fmt::Display for OrderPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(p: &OrderPattern, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match p {
                OrderPattern::Event(_)
                | OrderPattern::Opt(_)
                | OrderPattern::Star(_)
                | OrderPattern::Plus(_) => write!(f, "{p}"),
                _ => write!(f, "({p})"),
            }
        }
        match self {
            OrderPattern::Event(l) => f.write_str(l),
            OrderPattern::Seq(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    match p {
                        OrderPattern::Alt(_) => write!(f, "({p})")?,
                        _ => write!(f, "{p}")?,
                    }
                }
                Ok(())
            }
            OrderPattern::Alt(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            OrderPattern::Opt(p) => {
                atom(p, f)?;
                f.write_str("?")
            }
            OrderPattern::Star(p) => {
                atom(p, f)?;
                f.write_str("*")
            }
            OrderPattern::Plus(p) => {
                atom(p, f)?;
                f.write_str("+")
            }
        }
    }
}

/// `alt := seq ('|' seq)*`. Parsing stops at any identifier in `stop`
/// (used for section keywords inside rule files).
pub(crate) fn parse_alt(cur: &mut Cursor<'_>, stop: &[&str]) -> Result<OrderPattern, RuleError> {
    let mut arms = vec![parse_seq(cur, stop)?];
    while cur.eat(&Tok::Pipe) {
        arms.push(parse_seq(cur, stop)?);
    }
    Ok(if arms.len() == 1 {
        arms.pop().unwrap()
    } else {
        OrderPattern::Alt(arms)
    })
}

fn starts_atom(tok: Option<&Tok>, stop: &[&str]) -> bool {
    match tok {
        Some(Tok::Ident(s)) => !stop.contains(&s.as_str()),
        Some(Tok::LParen) => true,
        _ => false,
    }
}

fn parse_seq(cur: &mut Cursor<'_>, stop: &[&str]) -> Result<OrderPattern, RuleError> {
    let mut items = Vec::new();
    loop {
        if !starts_atom(cur.peek(), stop) {
            break;
        }
        items.push(parse_postfix(cur, stop)?);
        // commas are accepted as optional separators
        cur.eat(&Tok::Comma);
    }
    match items.len() {
        0 => Err(RuleError::syntax(
            cur.pos(),
            &["event label", "`(`"],
            &cur.found(),
        )),
        1 => Ok(items.pop().unwrap()),
        _ => Ok(OrderPattern::Seq(items)),
    }
}

fn parse_postfix(cur: &mut Cursor<'_>, stop: &[&str]) -> Result<OrderPattern, RuleError> {
    let mut p = match cur.peek() {
        Some(Tok::LParen) => {
            cur.next();
            let inner = parse_alt(cur, stop)?;
            cur.expect(&Tok::RParen)?;
            inner
        }
        _ => {
            let (label, _) = cur.ident("event label")?;
            OrderPattern::Event(label)
        }
    };
    loop {
        p = match cur.peek() {
            Some(Tok::Question) => OrderPattern::Opt(Box::new(p)),
            Some(Tok::Star) => OrderPattern::Star(Box::new(p)),
            Some(Tok::Plus) => OrderPattern::Plus(Box::new(p)),
            _ => break,
        };
        cur.next();
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_pattern() {
        let p = OrderPattern::parse("getInstance (initSign update+ sign)+").unwrap();
        assert_eq!(p.to_string(), "getInstance (initSign update+ sign)+");
        assert_eq!(
            p.labels().into_iter().collect::<Vec<_>>(),
            vec!["getInstance", "initSign", "sign", "update"]
        );
    }

    #[test]
    fn display_round_trips() {
        for src in ["a | b c", "a (b | c)* d?", "(a b)+ | c", "a, b, c"] {
            let p = OrderPattern::parse(src).unwrap();
            assert_eq!(OrderPattern::parse(&p.to_string()).unwrap(), p, "{src}");
        }
    }

    #[test]
    fn rejects_empty_and_unbalanced() {
        assert!(OrderPattern::parse("").is_err());
        assert!(OrderPattern::parse("(a b").is_err());
        assert!(OrderPattern::parse("a |").is_err());
        assert!(OrderPattern::parse("a )").is_err());
    }
}

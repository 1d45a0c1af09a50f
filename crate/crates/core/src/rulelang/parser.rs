use super::error::{Pos, RuleError};
use super::lexer::{tokenize, Cursor, Tok};
use super::pattern::parse_alt;
use super::{
    compile_order, Component, ComponentGuard, ConstraintKind, ConstraintSpec, EventAlias,
    EventDecl, EventPattern, Literal, NeverTypeSpec, ParamKind, PredicateBinding, PredicateSpec,
    RuleSpec,
};

const SECTIONS: [&str; 8] = [
    "CLASS",
    "EVENTS",
    "ORDER",
    "CONSTRAINTS",
    "REQUIRES",
    "ENSURES",
    "FORBIDDEN",
    "NEVERTYPE",
];

/// Parse and validate one rule document.
pub fn parse_rule(text: &str) -> Result<RuleSpec, RuleError> {
    let toks = tokenize(text)?;
    let eof = Pos {
        line: text.lines().count().max(1),
        col: text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1),
    };
    let mut p = Parser {
        cur: Cursor::new(&toks, eof),
        events: Vec::new(),
        aliases: Vec::new(),
    };
    p.rule()
}

struct Parser<'a> {
    cur: Cursor<'a>,
    events: Vec<EventDecl>,
    aliases: Vec<EventAlias>,
}

#[derive(Default)]
struct Refs {
    // label, position, optional parameter index
    uses: Vec<(String, Pos, Option<usize>)>,
}

impl<'a> Parser<'a> {
    fn rule(&mut self) -> Result<RuleSpec, RuleError> {
        self.section("CLASS")?;
        let class_name = self.qualified_name()?;
        self.cur.eat(&Tok::Semi);

        self.section("EVENTS")?;
        while !self.at_section() {
            self.event_decl()?;
        }
        if self.events.is_empty() {
            return Err(RuleError::invalid(self.cur.pos(), "EVENTS declares no event"));
        }

        let order_pos = self.section("ORDER")?;
        let order_pattern = parse_alt(&mut self.cur, &SECTIONS)?;
        self.cur.eat(&Tok::Semi);

        let mut refs = Refs::default();
        for label in order_pattern.labels() {
            refs.uses.push((label, order_pos, None));
        }

        let mut constraints = Vec::new();
        if self.optional_section("CONSTRAINTS")? {
            while !self.at_section() {
                constraints.push(self.constraint(&mut refs)?);
            }
        }
        let mut requires = Vec::new();
        if self.optional_section("REQUIRES")? {
            while !self.at_section() {
                let pos = self.cur.pos();
                let pred = self.predicate(&mut refs)?;
                if !matches!(pred.binding, PredicateBinding::Param { .. }) {
                    return Err(RuleError::invalid(
                        pos,
                        "REQUIRES predicates must bind an event parameter",
                    ));
                }
                requires.push(pred);
            }
        }
        let mut ensures = Vec::new();
        if self.optional_section("ENSURES")? {
            while !self.at_section() {
                ensures.push(self.predicate(&mut refs)?);
            }
        }
        let mut forbidden = Vec::new();
        if self.optional_section("FORBIDDEN")? {
            while !self.at_section() {
                let (label, pos) = self.cur.ident("event label")?;
                self.cur.expect(&Tok::Semi)?;
                refs.uses.push((label.clone(), pos, None));
                forbidden.push(label);
            }
        }
        let mut never_type = Vec::new();
        if self.optional_section("NEVERTYPE")? {
            while !self.at_section() {
                let (label, pos) = self.cur.ident("event label")?;
                let index = self.index()?;
                let (ty, ty_pos) = self.cur.ident("type name")?;
                if ty != "String" {
                    return Err(RuleError::invalid(
                        ty_pos,
                        format!("NEVERTYPE supports only `String`, found `{ty}`"),
                    ));
                }
                self.cur.expect(&Tok::Semi)?;
                refs.uses.push((label.clone(), pos, Some(index)));
                never_type.push(NeverTypeSpec {
                    target_event: label,
                    param_index: index,
                    forbidden_source_type: ty,
                });
            }
        }
        if !self.cur.at_end() {
            let expected: Vec<&str> = SECTIONS.to_vec();
            return Err(RuleError::syntax(self.cur.pos(), &expected, &self.cur.found()));
        }

        self.validate(&refs)?;

        let expanded = order_pattern.expand(&|l| {
            self.aliases
                .iter()
                .find(|a| a.label == l)
                .map(|a| a.members.clone())
        });
        let automaton = compile_order(&expanded);
        if automaton.accepting().is_empty() {
            return Err(RuleError::invalid(order_pos, "ORDER accepts no event sequence"));
        }

        Ok(RuleSpec {
            class_name,
            events: std::mem::take(&mut self.events),
            aliases: std::mem::take(&mut self.aliases),
            order_pattern,
            automaton,
            constraints,
            requires,
            ensures,
            forbidden,
            never_type,
        })
    }

    fn at_section(&self) -> bool {
        match self.cur.peek() {
            None => true,
            Some(Tok::Ident(s)) => SECTIONS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn section(&mut self, name: &str) -> Result<Pos, RuleError> {
        let pos = self.cur.pos();
        match self.cur.peek() {
            Some(Tok::Ident(s)) if s == name => {
                self.cur.next();
                Ok(pos)
            }
            _ => Err(RuleError::syntax(pos, &[name], &self.cur.found())),
        }
    }

    fn optional_section(&mut self, name: &str) -> Result<bool, RuleError> {
        match self.cur.peek() {
            Some(Tok::Ident(s)) if s == name => {
                self.cur.next();
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn qualified_name(&mut self) -> Result<String, RuleError> {
        let (mut name, _) = self.cur.ident("class name")?;
        while self.cur.eat(&Tok::Dot) {
            let (part, _) = self.cur.ident("class name segment")?;
            name.push('.');
            name.push_str(&part);
        }
        Ok(name)
    }

    fn check_fresh(&self, label: &str, pos: Pos) -> Result<(), RuleError> {
        if SECTIONS.contains(&label) {
            return Err(RuleError::invalid(pos, format!("`{label}` is a reserved word")));
        }
        if self.events.iter().any(|e| e.label == label)
            || self.aliases.iter().any(|a| a.label == label)
        {
            return Err(RuleError::DuplicateLabel {
                pos,
                label: label.to_string(),
            });
        }
        Ok(())
    }

    fn event_decl(&mut self) -> Result<(), RuleError> {
        let (label, pos) = self.cur.ident("event label")?;
        self.check_fresh(&label, pos)?;
        if self.cur.eat(&Tok::Define) {
            let mut members = Vec::new();
            loop {
                let (m, mpos) = self.cur.ident("event label")?;
                if self.events.iter().all(|e| e.label != m) {
                    return Err(RuleError::UndeclaredEvent { pos: mpos, label: m });
                }
                if !members.contains(&m) {
                    members.push(m);
                }
                if !self.cur.eat(&Tok::Pipe) {
                    break;
                }
            }
            self.cur.expect(&Tok::Semi)?;
            self.aliases.push(EventAlias { label, members, pos });
            return Ok(());
        }
        self.cur.expect(&Tok::Colon)?;
        let (method_name, _) = self.cur.ident("method name")?;
        self.cur.expect(&Tok::LParen)?;
        let mut parameter_kinds = Vec::new();
        if !self.cur.eat(&Tok::RParen) {
            loop {
                let (kw, kpos) = self.cur.ident("parameter kind")?;
                let kind = ParamKind::from_keyword(&kw).ok_or_else(|| {
                    RuleError::syntax(
                        kpos,
                        &[
                            "secret", "data", "algorithm", "key", "salt", "iv", "iterations",
                            "size", "random", "spec", "_",
                        ],
                        &format!("identifier `{kw}`"),
                    )
                })?;
                parameter_kinds.push(kind);
                if self.cur.eat(&Tok::RParen) {
                    break;
                }
                self.cur.expect(&Tok::Comma)?;
            }
        }
        self.cur.expect(&Tok::Semi)?;
        self.events.push(EventDecl {
            label,
            pattern: EventPattern {
                method_name,
                parameter_kinds,
            },
            pos,
        });
        Ok(())
    }

    fn index(&mut self) -> Result<usize, RuleError> {
        self.cur.expect(&Tok::LBracket)?;
        let (i, pos) = self.cur.int()?;
        if i < 0 {
            return Err(RuleError::invalid(pos, "parameter index must be non-negative"));
        }
        self.cur.expect(&Tok::RBracket)?;
        Ok(i as usize)
    }

    fn literal_set(&mut self) -> Result<Vec<Literal>, RuleError> {
        self.cur.expect(&Tok::LBrace)?;
        let mut out = Vec::new();
        if self.cur.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let pos = self.cur.pos();
            match self.cur.peek() {
                Some(Tok::Str(s)) => out.push(Literal::Str(s.clone())),
                Some(Tok::Int(i)) => out.push(Literal::Int(*i)),
                _ => {
                    return Err(RuleError::syntax(
                        pos,
                        &["string literal", "integer"],
                        &self.cur.found(),
                    ))
                }
            }
            self.cur.next();
            if self.cur.eat(&Tok::RBrace) {
                break;
            }
            self.cur.expect(&Tok::Comma)?;
        }
        Ok(out)
    }

    fn set_op(&mut self) -> Result<bool, RuleError> {
        let pos = self.cur.pos();
        match self.cur.peek() {
            Some(Tok::Ident(s)) if s == "in" => {
                self.cur.next();
                Ok(false)
            }
            Some(Tok::Ident(s)) if s == "notin" => {
                self.cur.next();
                Ok(true)
            }
            _ => Err(RuleError::syntax(pos, &["`in`", "`notin`"], &self.cur.found())),
        }
    }

    fn constraint(&mut self, refs: &mut Refs) -> Result<ConstraintSpec, RuleError> {
        let (label, pos) = self.cur.ident("event label")?;
        let index = self.index()?;
        refs.uses.push((label.clone(), pos, Some(index)));
        let kind = match self.cur.peek() {
            Some(Tok::AtLeast) => {
                self.cur.next();
                let (bound, _) = self.cur.int()?;
                ConstraintKind::IntAtLeast { bound }
            }
            Some(Tok::Ident(s)) if Component::from_keyword(s).is_some() => {
                let component = Component::from_keyword(s).unwrap();
                self.cur.next();
                let negated = self.set_op()?;
                let values = self.literal_set()?;
                let guard = match self.cur.peek() {
                    Some(Tok::Ident(w)) if w == "when" => {
                        self.cur.next();
                        let (c, cpos) = self.cur.ident("transformation component")?;
                        let component = Component::from_keyword(&c).ok_or_else(|| {
                            RuleError::syntax(
                                cpos,
                                &["algorithm", "mode", "padding"],
                                &format!("identifier `{c}`"),
                            )
                        })?;
                        let negated = self.set_op()?;
                        let values = self.literal_set()?;
                        Some(ComponentGuard {
                            component,
                            negated,
                            values,
                        })
                    }
                    _ => None,
                };
                ConstraintKind::TransformationComponentInSet {
                    component,
                    negated,
                    values,
                    guard,
                }
            }
            Some(Tok::Ident(s)) if s == "in" || s == "notin" => {
                let negated = self.set_op()?;
                let values = self.literal_set()?;
                if negated {
                    ConstraintKind::ValueNotInSet { values }
                } else {
                    ConstraintKind::ValueInSet { values }
                }
            }
            _ => {
                return Err(RuleError::syntax(
                    self.cur.pos(),
                    &["`in`", "`notin`", "`>=`", "transformation component"],
                    &self.cur.found(),
                ))
            }
        };
        self.cur.expect(&Tok::Semi)?;
        Ok(ConstraintSpec {
            target_event: label,
            param_index: index,
            kind,
        })
    }

    fn predicate(&mut self, refs: &mut Refs) -> Result<PredicateSpec, RuleError> {
        let (predicate_name, _) = self.cur.ident("predicate name")?;
        let pos = self.cur.pos();
        match self.cur.peek() {
            Some(Tok::Ident(s)) if s == "on" => {
                self.cur.next();
            }
            _ => return Err(RuleError::syntax(pos, &["`on`"], &self.cur.found())),
        }
        let (target, tpos) = self.cur.ident("`this` or event label")?;
        let binding = if target == "this" {
            PredicateBinding::ThisObject
        } else if self.cur.eat(&Tok::Dot) {
            let (kw, kpos) = self.cur.ident("`return`")?;
            if kw != "return" {
                return Err(RuleError::syntax(kpos, &["`return`"], &format!("identifier `{kw}`")));
            }
            refs.uses.push((target.clone(), tpos, None));
            PredicateBinding::ReturnValue { event: target }
        } else {
            let index = self.index()?;
            refs.uses.push((target.clone(), tpos, Some(index)));
            PredicateBinding::Param {
                event: target,
                index,
            }
        };
        self.cur.expect(&Tok::Semi)?;
        Ok(PredicateSpec {
            predicate_name,
            binding,
        })
    }

    fn validate(&self, refs: &Refs) -> Result<(), RuleError> {
        for (label, pos, index) in &refs.uses {
            let members: Vec<&EventDecl> = match self.aliases.iter().find(|a| &a.label == label) {
                Some(a) => a
                    .members
                    .iter()
                    .filter_map(|m| self.events.iter().find(|e| &e.label == m))
                    .collect(),
                None => match self.events.iter().find(|e| &e.label == label) {
                    Some(e) => vec![e],
                    None => {
                        return Err(RuleError::UndeclaredEvent {
                            pos: *pos,
                            label: label.clone(),
                        })
                    }
                },
            };
            if let Some(i) = index {
                for e in members {
                    if *i >= e.pattern.arity() {
                        return Err(RuleError::ParamOutOfRange {
                            pos: *pos,
                            label: e.label.clone(),
                            index: *i,
                            arity: e.pattern.arity(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

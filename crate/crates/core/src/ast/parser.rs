use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use super::{
    Aggregate, ArithOp, Cardinality, CmpOp, Connective, Formula, FunctionDecl, Pos,
    PredicateDecl, Problem, QuantKind, Sort, Term, Var, Vocabulary, INT_SORT_NAME, RESERVED,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: duplicate declaration of `{name}`")]
    Duplicate { pos: Pos, name: String },
    #[error("{pos}: unknown symbol `{name}`")]
    UnknownSymbol { pos: Pos, name: String },
    #[error("{pos}: `{name}` expects {expected} argument(s), found {found}")]
    Arity {
        pos: Pos,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: `{name}` is a reserved word")]
    Reserved { pos: Pos, name: String },
    #[error("{pos}: division by literal zero")]
    DivisionByZero { pos: Pos },
    #[error("a problem needs at least one sentence")]
    NoSentences,
}

impl ParseError {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Duplicate { pos, .. }
            | ParseError::UnknownSymbol { pos, .. }
            | ParseError::Arity { pos, .. }
            | ParseError::Reserved { pos, .. }
            | ParseError::DivisionByZero { pos } => Some(*pos),
            ParseError::NoSentences => None,
        }
    }
}

type Result<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Bang,
    Question,
    Amp,
    Pipe,
    Implies,
    Iff,
    Tilde,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Hash,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", symbol_text(other)),
        }
    }
}

fn symbol_text(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::Comma => ",",
        Tok::Colon => ":",
        Tok::Dot => ".",
        Tok::Bang => "!",
        Tok::Question => "?",
        Tok::Amp => "&",
        Tok::Pipe => "|",
        Tok::Implies => "=>",
        Tok::Iff => "<=>",
        Tok::Tilde => "~",
        Tok::Eq => "=",
        Tok::Ne => "~=",
        Tok::Lt => "<",
        Tok::Gt => ">",
        Tok::Le => "=<",
        Tok::Ge => ">=",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Hash => "#",
        Tok::Arrow => "->",
        Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(word), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let n = text.parse::<i64>().map_err(|_| ParseError::Syntax {
                pos,
                msg: format!("integer literal `{text}` out of range"),
            })?;
            out.push((Tok::Int(n), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if rest.starts_with("<=>") {
            (Tok::Iff, 3)
        } else if rest.starts_with("=>") {
            (Tok::Implies, 2)
        } else if rest.starts_with("=<") {
            (Tok::Le, 2)
        } else if rest.starts_with(">=") {
            (Tok::Ge, 2)
        } else if rest.starts_with("~=") {
            (Tok::Ne, 2)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '.' => Tok::Dot,
                '!' => Tok::Bang,
                '?' => Tok::Question,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '~' => Tok::Tilde,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '#' => Tok::Hash,
                other => {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            };
            (t, 1)
        };
        advance(len, &mut i, &mut col);
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Parses a problem file: declarations (one per line by convention) followed
/// by one or more `theory { ... }` blocks. Symbols are resolved against the
/// declarations and bound variables are renamed apart.
pub fn parse_problem(source: &str) -> Result<Problem> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        i: 0,
        vocab: Vocabulary::default(),
        scopes: Vec::new(),
        used_names: HashSet::new(),
    };
    let mut cardinalities = BTreeMap::new();
    let mut theory_ranges = Vec::new();

    // Declarations first; theory blocks are only delimited here and parsed
    // once every symbol is known.
    loop {
        let (tok, pos) = p.peek_full();
        match tok {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "type" => {
                p.bump();
                let (name, npos) = p.expect_ident()?;
                p.check_fresh_symbol(&name, npos)?;
                let card = if p.peek_ident_is("size") {
                    p.bump();
                    match p.bump() {
                        (Tok::Int(n), _) if n >= 0 => Cardinality::Fixed(n as u64),
                        (t, pos) => {
                            return Err(ParseError::Syntax {
                                pos,
                                msg: format!("expected a type size, found {}", t.describe()),
                            })
                        }
                    }
                } else {
                    Cardinality::Generative
                };
                p.vocab.types.push(name.clone());
                cardinalities.insert(name, card);
            }
            Tok::Ident(kw) if kw == "pred" => {
                p.bump();
                let (name, npos) = p.expect_ident()?;
                p.check_fresh_symbol(&name, npos)?;
                let args = if p.peek() == &Tok::LParen {
                    p.type_list()?
                } else {
                    Vec::new()
                };
                p.vocab.predicates.push(PredicateDecl { name, args });
            }
            Tok::Ident(kw) if kw == "func" || kw == "const" => {
                let is_const = kw == "const";
                p.bump();
                let (name, npos) = p.expect_ident()?;
                p.check_fresh_symbol(&name, npos)?;
                let args = if !is_const && p.peek() == &Tok::LParen {
                    p.type_list()?
                } else {
                    Vec::new()
                };
                p.expect(Tok::Arrow)?;
                let (result, _) = p.expect_ident()?;
                let result = if result == INT_SORT_NAME {
                    Sort::Int
                } else {
                    Sort::Named(result)
                };
                p.vocab.functions.push(FunctionDecl { name, args, result });
            }
            Tok::Ident(kw) if kw == "theory" => {
                p.bump();
                p.expect(Tok::LBrace)?;
                let start = p.i;
                let mut depth = 1usize;
                while depth > 0 {
                    match p.bump() {
                        (Tok::LBrace, _) => depth += 1,
                        (Tok::RBrace, _) => depth -= 1,
                        (Tok::Eof, pos) => {
                            return Err(ParseError::Syntax {
                                pos,
                                msg: "unterminated theory block".into(),
                            })
                        }
                        _ => {}
                    }
                }
                theory_ranges.push((start, p.i - 1));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("expected a declaration, found {}", other.describe()),
                })
            }
        }
    }

    // Every type used in a signature must be declared.
    let mut sig_types: Vec<(String, Pos)> = Vec::new();
    for pr in &p.vocab.predicates {
        sig_types.extend(pr.args.iter().map(|t| (t.clone(), Pos::default())));
    }
    for f in &p.vocab.functions {
        sig_types.extend(f.args.iter().map(|t| (t.clone(), Pos::default())));
        if let Sort::Named(t) = &f.result {
            sig_types.push((t.clone(), Pos::default()));
        }
    }
    for (t, pos) in sig_types {
        if !p.vocab.has_type(&t) {
            return Err(ParseError::UnknownSymbol { pos, name: t });
        }
    }

    let mut sentences = Vec::new();
    let mut positions = Vec::new();
    for (start, end) in theory_ranges {
        p.i = start;
        while p.i < end {
            let pos = p.peek_full().1;
            let f = p.formula()?;
            p.expect(Tok::Dot)?;
            sentences.push(f);
            positions.push(pos);
        }
    }
    if sentences.is_empty() {
        return Err(ParseError::NoSentences);
    }
    Ok(Problem {
        vocabulary: p.vocab,
        sentences,
        cardinalities,
        sentence_positions: positions,
    })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    vocab: Vocabulary,
    /// Innermost scope last: (source name, renamed variable).
    scopes: Vec<(String, Var)>,
    used_names: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_full(&self) -> (Tok, Pos) {
        self.toks[self.i].clone()
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].0
    }

    fn peek_ident_is(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if self.i < self.toks.len() - 1 {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos> {
        let (t, pos) = self.bump();
        if t == want {
            Ok(pos)
        } else {
            Err(ParseError::Syntax {
                pos,
                msg: format!("expected {}, found {}", want.describe(), t.describe()),
            })
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Pos)> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => Err(ParseError::Syntax {
                pos,
                msg: format!("expected an identifier, found {}", t.describe()),
            }),
        }
    }

    fn check_fresh_symbol(&mut self, name: &str, pos: Pos) -> Result<()> {
        if RESERVED.contains(&name) {
            return Err(ParseError::Reserved {
                pos,
                name: name.to_string(),
            });
        }
        if !self.used_names.insert(name.to_string()) {
            return Err(ParseError::Duplicate {
                pos,
                name: name.to_string(),
            });
        }
        Ok(())
    }

    fn type_list(&mut self) -> Result<Vec<String>> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                let (t, pos) = self.expect_ident()?;
                if t == INT_SORT_NAME {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "symbol arguments must range over declared types".into(),
                    });
                }
                out.push(t);
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn lookup_var(&self, name: &str) -> Option<Var> {
        self.scopes
            .iter()
            .rev()
            .find(|(src, _)| src == name)
            .map(|(_, v)| v.clone())
    }

    fn fresh_name(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut k = 1;
        while self.used_names.contains(&name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.used_names.insert(name.clone());
        name
    }

    /// `x in T (, y in U)*`; pushes the binders on the scope stack.
    fn binders(&mut self) -> Result<Vec<Var>> {
        let mut vars = Vec::new();
        loop {
            let (name, pos) = self.expect_ident()?;
            if RESERVED.contains(&name.as_str()) {
                return Err(ParseError::Reserved { pos, name });
            }
            if !self.peek_ident_is("in") {
                let (t, pos) = self.peek_full();
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("expected `in`, found {}", t.describe()),
                });
            }
            self.bump();
            let (ty, tpos) = self.expect_ident()?;
            let sort = if ty == INT_SORT_NAME || ty == "Nat" {
                Sort::Int
            } else if self.vocab.has_type(&ty) {
                Sort::Named(ty)
            } else {
                return Err(ParseError::UnknownSymbol { pos: tpos, name: ty });
            };
            let renamed = self.fresh_name(&name);
            let v = Var { name: renamed, sort };
            vars.push((name, v));
            if self.peek() == &Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        let out = vars.iter().map(|(_, v)| v.clone()).collect();
        self.scopes.extend(vars);
        Ok(out)
    }

    fn formula(&mut self) -> Result<Formula> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.implication()?;
        while self.peek() == &Tok::Iff {
            self.bump();
            let rhs = self.implication()?;
            lhs = Formula::Conn(Connective::Iff, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.peek() == &Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while self.peek() == &Tok::Pipe {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.peek() == &Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Bang | Tok::Question => {
                let kind = if self.bump().0 == Tok::Bang {
                    QuantKind::Forall
                } else {
                    QuantKind::Exists
                };
                let depth = self.scopes.len();
                let vars = self.binders()?;
                self.expect(Tok::Colon)?;
                let body = self.formula();
                self.scopes.truncate(depth);
                Ok(Formula::Quant(kind, vars, Box::new(body?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let (tok, pos) = self.peek_full();
        match tok {
            Tok::Ident(ref w) if w == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(ref w) if w == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LParen => {
                // Either a parenthesised formula or the start of a term.
                let save = self.i;
                let depth = self.scopes.len();
                self.bump();
                if let Ok(f) = self.formula() {
                    if self.peek() == &Tok::RParen && !is_term_continuation(self.peek_at(1)) {
                        self.bump();
                        return Ok(f);
                    }
                }
                self.scopes.truncate(depth);
                self.i = save;
                self.comparison()
            }
            Tok::Ident(ref name)
                if self.lookup_var(name).is_none() && self.vocab.predicate(name).is_some() =>
            {
                let name = name.clone();
                self.bump();
                let args = if self.peek() == &Tok::LParen {
                    self.term_args()?
                } else {
                    Vec::new()
                };
                let expected = self.vocab.predicate(&name).map_or(0, |p| p.args.len());
                if expected != args.len() {
                    return Err(ParseError::Arity {
                        pos,
                        name,
                        expected,
                        found: args.len(),
                    });
                }
                Ok(Formula::Pred(name, args))
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<Formula> {
        let lhs = self.term()?;
        let (tok, pos) = self.bump();
        let op = match tok {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            Tok::Le => CmpOp::Le,
            Tok::Ge => CmpOp::Ge,
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("expected a comparison operator, found {}", other.describe()),
                })
            }
        };
        let rhs = self.term()?;
        Ok(Formula::Cmp(op, lhs, rhs))
    }

    fn term_args(&mut self) -> Result<Vec<Term>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                args.push(self.term()?);
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Term::arith(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Term> {
        let mut lhs = self.signed()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            let pos = self.bump().1;
            let rhs = self.signed()?;
            if op == ArithOp::Div && rhs == Term::Int(0) {
                return Err(ParseError::DivisionByZero { pos });
            }
            lhs = Term::arith(op, lhs, rhs);
        }
    }

    fn signed(&mut self) -> Result<Term> {
        if self.peek() == &Tok::Minus {
            let pos = self.bump().1;
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(Term::Int(-n));
            }
            let inner = self.signed().map_err(|e| match e {
                ParseError::Syntax { msg, .. } => ParseError::Syntax { pos, msg },
                other => other,
            })?;
            return Ok(Term::arith(ArithOp::Sub, Term::Int(0), inner));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Int(n) => Ok(Term::Int(n)),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Hash => {
                self.expect(Tok::LBrace)?;
                let depth = self.scopes.len();
                let res = (|| {
                    let vars = self.binders()?;
                    self.expect(Tok::Colon)?;
                    let filter = self.formula()?;
                    self.expect(Tok::RBrace)?;
                    Ok(Term::Count(vars, Box::new(filter)))
                })();
                self.scopes.truncate(depth);
                res
            }
            Tok::Ident(ref w) if w == "sum" => {
                self.expect(Tok::LBrace)?;
                self.expect(Tok::LBrace)?;
                let depth = self.scopes.len();
                let res = (|| {
                    let vars = self.binders()?;
                    self.expect(Tok::Colon)?;
                    let filter = self.formula()?;
                    self.expect(Tok::Colon)?;
                    let body = self.term()?;
                    self.expect(Tok::RBrace)?;
                    self.expect(Tok::RBrace)?;
                    Ok(Term::Sum(Aggregate {
                        vars,
                        filter: Box::new(filter),
                        body: Box::new(body),
                    }))
                })();
                self.scopes.truncate(depth);
                res
            }
            Tok::Ident(name) => {
                if RESERVED.contains(&name.as_str()) {
                    return Err(ParseError::Reserved { pos, name });
                }
                if let Some(v) = self.lookup_var(&name) {
                    if self.peek() == &Tok::LParen {
                        return Err(ParseError::Syntax {
                            pos,
                            msg: format!("variable `{name}` applied like a function"),
                        });
                    }
                    return Ok(Term::Var(v));
                }
                let Some(expected) = self.vocab.function(&name).map(|f| f.args.len()) else {
                    return Err(ParseError::UnknownSymbol { pos, name });
                };
                let args = if self.peek() == &Tok::LParen {
                    self.term_args()?
                } else {
                    Vec::new()
                };
                if args.len() != expected {
                    return Err(ParseError::Arity {
                        pos,
                        name,
                        expected,
                        found: args.len(),
                    });
                }
                Ok(Term::App(name, args))
            }
            other => Err(ParseError::Syntax {
                pos,
                msg: format!("expected a term, found {}", other.describe()),
            }),
        }
    }
}

fn is_term_continuation(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Eq
            | Tok::Ne
            | Tok::Lt
            | Tok::Gt
            | Tok::Le
            | Tok::Ge
            | Tok::Plus
            | Tok::Minus
            | Tok::Star
            | Tok::Slash
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const PIGEONS: &str = "\
type Pigeon size 10
type Hole size 5
pred isIn(Pigeon, Hole)
theory {
  !h in Hole: #{p in Pigeon : isIn(p, h)} =< 2.
}
";

    #[test]
    fn pigeonhole_shape() {
        let p = parse_problem(PIGEONS).unwrap();
        assert_eq!(p.vocabulary.types.len(), 2);
        assert_eq!(p.vocabulary.predicates.len(), 1);
        assert_eq!(p.sentences.len(), 1);
        assert_eq!(p.fixed_size("Pigeon"), Some(10));
        assert_eq!(p.sentence_pos(0), Pos { line: 5, col: 3 });
    }

    #[test]
    fn arity_mismatch() {
        let src = "type T size 2\npred p(T)\ntheory { !x in T, y in T: p(x, y). }";
        let err = parse_problem(src).unwrap_err();
        assert!(matches!(err, ParseError::Arity { expected: 1, found: 2, .. }), "{err}");
    }

    #[test]
    fn empty_theory() {
        let err = parse_problem("type T size 2\ntheory { }").unwrap_err();
        assert_eq!(err, ParseError::NoSentences);
        assert!(err.to_string().contains("at least one sentence"));
    }

    #[test]
    fn duplicate_and_unknown() {
        let err = parse_problem("type T\npred T(T)\ntheory { true. }").unwrap_err();
        assert!(matches!(err, ParseError::Duplicate { .. }));
        let err = parse_problem("type T\ntheory { !x in T: q(x). }").unwrap_err();
        assert!(matches!(err, ParseError::UnknownSymbol { ref name, .. } if name == "q"));
        let err = parse_problem("type T\ntheory { !x in U: true. }").unwrap_err();
        assert!(matches!(err, ParseError::UnknownSymbol { ref name, .. } if name == "U"));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_problem("type T\npred p(T)\ntheory {\n  !x in T p(x).\n}").unwrap_err();
        assert_eq!(err.pos(), Some(Pos { line: 4, col: 11 }));
    }

    #[test]
    fn reserved_names_rejected() {
        assert!(matches!(
            parse_problem("type T\nfunc mul(T) -> Int\ntheory { true. }"),
            Err(ParseError::Reserved { .. })
        ));
    }

    #[test]
    fn literal_division_by_zero() {
        let err = parse_problem("const c -> Int\ntheory { c / 0 = 1. }").unwrap_err();
        assert!(matches!(err, ParseError::DivisionByZero { .. }));
    }

    #[test]
    fn bound_variables_are_renamed_apart() {
        let src = "type T size 2\npred p(T)\ntheory { !x in T: p(x). ?x in T: p(x). }";
        let p = parse_problem(src).unwrap();
        let names: Vec<_> = p
            .sentences
            .iter()
            .map(|s| match s {
                Formula::Quant(_, vs, _) => vs[0].name.clone(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(names, vec!["x", "x_1"]);
    }

    #[test]
    fn parenthesised_term_vs_formula() {
        let src = "const c -> Int\npred q\ntheory { (c + 1) * 2 = 4. (q & true). ((c)) = 1. }";
        let p = parse_problem(src).unwrap();
        assert!(matches!(p.sentences[0], Formula::Cmp(CmpOp::Eq, _, _)));
        assert!(matches!(p.sentences[1], Formula::Conn(Connective::And, _, _)));
        assert!(matches!(p.sentences[2], Formula::Cmp(CmpOp::Eq, _, _)));
    }

    #[test]
    fn generative_types_and_constants() {
        let src = "type Rack\ntype Slot size 3\nconst main -> Rack\nfunc cap(Rack) -> Int\n\
                   theory { cap(main) >= 1. }";
        let p = parse_problem(src).unwrap();
        assert_eq!(p.generative_types(), vec!["Rack".to_string()]);
        assert_eq!(p.vocabulary.function("main").unwrap().args.len(), 0);
        assert_eq!(p.vocabulary.function("cap").unwrap().result, Sort::Int);
    }
}

//! Surface-syntax printing. Output re-parses to the same AST for source
//! problems; meta-terms (`mul`, `lcm`, `exactdiv`, `divides`) print as
//! builtin calls.

use std::fmt::{self, Display, Formatter, Write};

use super::{
    ArithOp, Cardinality, CmpOp, Connective, Formula, Problem, QuantKind, Sort, Term, Var,
    Vocabulary,
};

impl Display for ArithOp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        })
    }
}

impl Display for CmpOp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "~=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "=<",
            CmpOp::Ge => ">=",
        })
    }
}

impl Display for Connective {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connective::And => "&",
            Connective::Or => "|",
            Connective::Implies => "=>",
            Connective::Iff => "<=>",
        })
    }
}

fn arith_prec(op: ArithOp) -> u8 {
    match op {
        ArithOp::Add | ArithOp::Sub => 1,
        ArithOp::Mul | ArithOp::Div => 2,
    }
}

fn conn_prec(c: Connective) -> u8 {
    match c {
        Connective::Iff => 1,
        Connective::Implies => 2,
        Connective::Or => 3,
        Connective::And => 4,
    }
}

fn write_binders(f: &mut Formatter<'_>, vars: &[Var]) -> fmt::Result {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{} in {}", v.name, v.sort)?;
    }
    Ok(())
}

fn write_args(f: &mut Formatter<'_>, name: &str, args: &[Term]) -> fmt::Result {
    f.write_str(name)?;
    if args.is_empty() {
        return Ok(());
    }
    f.write_char('(')?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write_term(f, a, 0)?;
    }
    f.write_char(')')
}

/// `ctx` is the minimum precedence that can appear without parentheses.
fn write_term(f: &mut Formatter<'_>, t: &Term, ctx: u8) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(&v.name),
        Term::App(name, args) => write_args(f, name, args),
        Term::Int(n) if *n < 0 && ctx > 0 => write!(f, "({n})"),
        Term::Int(n) => write!(f, "{n}"),
        Term::Arith(op, l, r) => {
            let p = arith_prec(*op);
            if p < ctx {
                f.write_char('(')?;
            }
            write_term(f, l, p)?;
            write!(f, " {op} ")?;
            write_term(f, r, p + 1)?;
            if p < ctx {
                f.write_char(')')?;
            }
            Ok(())
        }
        Term::Sum(agg) => {
            f.write_str("sum{{ ")?;
            write_binders(f, &agg.vars)?;
            f.write_str(" : ")?;
            write_formula(f, &agg.filter, 0)?;
            f.write_str(" : ")?;
            write_term(f, &agg.body, 0)?;
            f.write_str(" }}")
        }
        Term::Count(vars, filter) => {
            f.write_str("#{")?;
            write_binders(f, vars)?;
            f.write_str(" : ")?;
            write_formula(f, filter, 0)?;
            f.write_char('}')
        }
        Term::Mul(t) => {
            f.write_str("mul(")?;
            write_term(f, t, 0)?;
            f.write_char(')')
        }
        Term::Lcm(a, b) => {
            f.write_str("lcm(")?;
            write_term(f, a, 0)?;
            f.write_str(", ")?;
            write_term(f, b, 0)?;
            f.write_char(')')
        }
        Term::ExactDiv(a, b) => {
            f.write_str("exactdiv(")?;
            write_term(f, a, 0)?;
            f.write_str(", ")?;
            write_term(f, b, 0)?;
            f.write_char(')')
        }
    }
}

const NOT_PREC: u8 = 5;

fn write_formula(f: &mut Formatter<'_>, phi: &Formula, ctx: u8) -> fmt::Result {
    match phi {
        Formula::True => f.write_str("true"),
        Formula::False => f.write_str("false"),
        Formula::Pred(name, args) => write_args(f, name, args),
        Formula::Cmp(op, l, r) => {
            write_term(f, l, 0)?;
            write!(f, " {op} ")?;
            write_term(f, r, 0)
        }
        Formula::Conn(c, l, r) => {
            let p = conn_prec(*c);
            if p < ctx {
                f.write_char('(')?;
            }
            // `=>` is right-associative, the others left-associative.
            let (lp, rp) = if *c == Connective::Implies {
                (p + 1, p)
            } else {
                (p, p + 1)
            };
            write_formula(f, l, lp)?;
            write!(f, " {c} ")?;
            write_formula(f, r, rp)?;
            if p < ctx {
                f.write_char(')')?;
            }
            Ok(())
        }
        Formula::Not(g) => {
            f.write_char('~')?;
            write_formula(f, g, NOT_PREC)
        }
        Formula::Quant(kind, vars, body) => {
            // A quantifier body extends as far right as possible, so any
            // quantifier nested in an operator is parenthesised.
            if ctx > 0 {
                f.write_char('(')?;
            }
            f.write_char(if *kind == QuantKind::Forall { '!' } else { '?' })?;
            write_binders(f, vars)?;
            f.write_str(": ")?;
            write_formula(f, body, 0)?;
            if ctx > 0 {
                f.write_char(')')?;
            }
            Ok(())
        }
        Formula::TypeExtent(ty, n) => write!(f, "#{{x in {ty} : true}} = {n}"),
        Formula::Divides(d, n) => {
            f.write_str("divides(")?;
            write_term(f, d, 0)?;
            f.write_str(", ")?;
            write_term(f, n, 0)?;
            f.write_char(')')
        }
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}

impl Vocabulary {
    /// Declarations in surface syntax, one per line; `cards` supplies type sizes.
    pub fn write_declarations(
        &self,
        out: &mut impl Write,
        card: impl Fn(&str) -> Cardinality,
    ) -> fmt::Result {
        for t in &self.types {
            match card(t) {
                Cardinality::Fixed(n) => writeln!(out, "type {t} size {n}")?,
                Cardinality::Generative => writeln!(out, "type {t}")?,
            }
        }
        for p in &self.predicates {
            if p.args.is_empty() {
                writeln!(out, "pred {}", p.name)?;
            } else {
                writeln!(out, "pred {}({})", p.name, p.args.join(", "))?;
            }
        }
        for fun in &self.functions {
            let result = match &fun.result {
                Sort::Int => "Int".to_string(),
                Sort::Named(n) => n.clone(),
            };
            if fun.args.is_empty() {
                writeln!(out, "const {} -> {result}", fun.name)?;
            } else {
                writeln!(out, "func {}({}) -> {result}", fun.name, fun.args.join(", "))?;
            }
        }
        Ok(())
    }
}

impl Display for Problem {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        self.vocabulary
            .write_declarations(f, |t| self.cardinality(t))?;
        f.write_str("theory {\n")?;
        for s in &self.sentences {
            writeln!(f, "  {s}.")?;
        }
        f.write_str("}\n")
    }
}

#[cfg(test)]
mod tests {
    use crate::ast::parse_problem;

    fn round_trip(src: &str) {
        let p = parse_problem(src).unwrap();
        let printed = p.to_string();
        let q = parse_problem(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(p.sentences, q.sentences, "{printed}");
        assert_eq!(p.vocabulary, q.vocabulary);
        assert_eq!(p.cardinalities, q.cardinalities);
    }

    #[test]
    fn pigeonhole_prints_back() {
        let src = "type Pigeon size 10\ntype Hole size 5\npred isIn(Pigeon, Hole)\n\
                   theory { !h in Hole: #{p in Pigeon : isIn(p, h)} =< 2. }";
        let p = parse_problem(src).unwrap();
        assert_eq!(
            p.sentences[0].to_string(),
            "!h in Hole: #{p in Pigeon : isIn(p, h)} =< 2"
        );
        round_trip(src);
    }

    #[test]
    fn precedence_and_associativity() {
        round_trip(
            "type T size 2\npred p(T)\npred q\nconst c -> Int\nfunc f(T) -> T\n\
             theory {\n\
               (q => q) => q.\n q => q => q.\n ~(q & q) | q.\n (q <=> q) <=> q.\n\
               c - (c - 1) = c * (c + 2) / 3.\n c - -3 = 1 - c.\n\
               (!x in T: p(x)) & q.\n ~(?x in T: p(f(x))) | (!y in T: f(y) ~= y).\n\
               sum{{ x in T, y in T : p(x) & x = y : c * 2 }} >= 0.\n\
             }",
        );
    }
}

//! Ground SMT expressions with light constant folding.

use std::fmt::Write;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum G {
    B(bool),
    I(i128),
    Sym(String),
    Op(&'static str, Vec<G>),
}

impl G {
    pub fn sym(s: impl Into<String>) -> G {
        G::Sym(s.into())
    }

    pub fn as_int(&self) -> Option<i128> {
        match self {
            G::I(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            G::B(b) => Some(*b),
            _ => None,
        }
    }

    pub fn write_smt(&self, out: &mut String) {
        match self {
            G::B(b) => out.push_str(if *b { "true" } else { "false" }),
            G::I(n) if *n < 0 => {
                let _ = write!(out, "(- {})", n.unsigned_abs());
            }
            G::I(n) => {
                let _ = write!(out, "{n}");
            }
            G::Sym(s) => out.push_str(s),
            G::Op(op, args) => {
                out.push('(');
                out.push_str(op);
                for a in args {
                    out.push(' ');
                    a.write_smt(out);
                }
                out.push(')');
            }
        }
    }

    pub fn smt(&self) -> String {
        let mut s = String::new();
        self.write_smt(&mut s);
        s
    }
}

fn flatten(op: &'static str, parts: Vec<G>) -> Vec<G> {
    let mut out = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            G::Op(o, inner) if o == op => out.extend(inner),
            p => out.push(p),
        }
    }
    out
}

pub fn and(parts: Vec<G>) -> G {
    let mut out = Vec::new();
    for p in flatten("and", parts) {
        match p {
            G::B(true) => {}
            G::B(false) => return G::B(false),
            p => out.push(p),
        }
    }
    match out.len() {
        0 => G::B(true),
        1 => out.pop().unwrap(),
        _ => G::Op("and", out),
    }
}

pub fn or(parts: Vec<G>) -> G {
    let mut out = Vec::new();
    for p in flatten("or", parts) {
        match p {
            G::B(false) => {}
            G::B(true) => return G::B(true),
            p => out.push(p),
        }
    }
    match out.len() {
        0 => G::B(false),
        1 => out.pop().unwrap(),
        _ => G::Op("or", out),
    }
}

pub fn not(a: G) -> G {
    match a {
        G::B(b) => G::B(!b),
        G::Op("not", mut v) => v.pop().unwrap(),
        a => G::Op("not", vec![a]),
    }
}

pub fn implies(a: G, b: G) -> G {
    match (&a, &b) {
        (G::B(false), _) | (_, G::B(true)) => G::B(true),
        (G::B(true), _) => b,
        (_, G::B(false)) => not(a),
        _ => G::Op("=>", vec![a, b]),
    }
}

pub fn iff(a: G, b: G) -> G {
    match (&a, &b) {
        (G::B(x), G::B(y)) => G::B(x == y),
        (G::B(true), _) => b,
        (_, G::B(true)) => a,
        (G::B(false), _) => not(b),
        (_, G::B(false)) => not(a),
        _ if a == b => G::B(true),
        _ => G::Op("=", vec![a, b]),
    }
}

pub fn ite(c: G, a: G, b: G) -> G {
    match c {
        G::B(true) => a,
        G::B(false) => b,
        _ if a == b => a,
        c => match (&a, &b) {
            (G::B(true), G::B(false)) => c,
            (G::B(false), G::B(true)) => not(c),
            _ => G::Op("ite", vec![c, a, b]),
        },
    }
}

pub fn add(parts: Vec<G>) -> G {
    let mut k: i128 = 0;
    let mut out = Vec::new();
    for p in flatten("+", parts) {
        match p {
            G::I(n) => k += n,
            p => out.push(p),
        }
    }
    if k != 0 || out.is_empty() {
        out.push(G::I(k));
    }
    if out.len() == 1 {
        out.pop().unwrap()
    } else {
        G::Op("+", out)
    }
}

pub fn sub(a: G, b: G) -> G {
    match (&a, &b) {
        (G::I(x), G::I(y)) => G::I(x - y),
        (_, G::I(0)) => a,
        _ => G::Op("-", vec![a, b]),
    }
}

pub fn mul(parts: Vec<G>) -> G {
    let mut k: i128 = 1;
    let mut out = Vec::new();
    for p in flatten("*", parts) {
        match p {
            G::I(n) => k *= n,
            p => out.push(p),
        }
    }
    if k == 0 {
        return G::I(0);
    }
    if k != 1 || out.is_empty() {
        out.insert(0, G::I(k));
    }
    if out.len() == 1 {
        out.pop().unwrap()
    } else {
        G::Op("*", out)
    }
}

/// SMT-LIB `div`/`mod` (Euclidean); the caller guards zero divisors.
pub fn div(a: G, b: G) -> G {
    match (&a, &b) {
        (G::I(x), G::I(y)) if *y != 0 => G::I(x.div_euclid(*y)),
        (_, G::I(1)) => a,
        _ => G::Op("div", vec![a, b]),
    }
}

pub fn modulo(a: G, b: G) -> G {
    match (&a, &b) {
        (G::I(x), G::I(y)) if *y != 0 => G::I(x.rem_euclid(*y)),
        (_, G::I(1)) => G::I(0),
        _ => G::Op("mod", vec![a, b]),
    }
}

pub fn eq(a: G, b: G) -> G {
    match (&a, &b) {
        (G::I(x), G::I(y)) => G::B(x == y),
        (G::B(_), _) | (_, G::B(_)) => iff(a, b),
        _ if a == b => G::B(true),
        _ => G::Op("=", vec![a, b]),
    }
}

pub fn ne(a: G, b: G) -> G {
    not(eq(a, b))
}

pub fn lt(a: G, b: G) -> G {
    match (&a, &b) {
        (G::I(x), G::I(y)) => G::B(x < y),
        _ if a == b => G::B(false),
        _ => G::Op("<", vec![a, b]),
    }
}

pub fn le(a: G, b: G) -> G {
    match (&a, &b) {
        (G::I(x), G::I(y)) => G::B(x <= y),
        _ if a == b => G::B(true),
        _ => G::Op("<=", vec![a, b]),
    }
}

/// `d | n`, with `0 | n` iff `n = 0`.
pub fn divides(d: G, n: G) -> G {
    match &d {
        G::I(0) => eq(n, G::I(0)),
        G::I(_) => eq(modulo(n, d), G::I(0)),
        _ => ite(
            eq(d.clone(), G::I(0)),
            eq(n.clone(), G::I(0)),
            eq(modulo(n, d), G::I(0)),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> G {
        G::sym("x")
    }

    #[test]
    fn folding() {
        assert_eq!(and(vec![G::B(true), x()]), x());
        assert_eq!(or(vec![G::B(true), x()]), G::B(true));
        assert_eq!(add(vec![G::I(2), G::I(3)]), G::I(5));
        assert_eq!(mul(vec![G::I(0), x()]), G::I(0));
        assert_eq!(mul(vec![G::I(1), x()]), x());
        assert_eq!(lt(G::I(0), G::I(3)), G::B(true));
        assert_eq!(not(not(x())), x());
        assert_eq!(implies(G::B(true), x()), x());
        assert_eq!(div(G::I(-7), G::I(2)), G::I(-4));
    }

    #[test]
    fn printing() {
        let e = and(vec![lt(G::I(0), x()), eq(add(vec![x(), G::I(-2)]), G::sym("y"))]);
        assert_eq!(e.smt(), "(and (< 0 x) (= (+ x (- 2)) y))");
        assert_eq!(divides(G::I(3), x()).smt(), "(= (mod x 3) 0)");
    }
}

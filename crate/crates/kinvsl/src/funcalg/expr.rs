use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Atan,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
        }
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Atan => v.atan(),
        }
    }
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Param(String),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Call(Func, Expr),
    /// `outer` evaluated at the value of `inner`.
    Compose(Expr, Expr),
}

/// Immutable expression tree; subtrees are shared, so cloning is cheap.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

/// Real power with integer exponents routed through `powi`, so negative bases work.
pub fn real_pow(base: f64, e: f64) -> f64 {
    if e == e.trunc() && e.abs() <= 1024.0 {
        base.powi(e as i32)
    } else {
        base.powf(e)
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn constant(v: f64) -> Expr {
        Expr::wrap(Node::Const(v))
    }

    pub fn var() -> Expr {
        Expr::wrap(Node::Var)
    }

    pub fn param(name: &str) -> Expr {
        Expr::wrap(Node::Param(name.to_string()))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a.node() {
            Node::Const(v) => Expr::constant(-v),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::wrap(Node::Neg(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => {
                if let Node::Neg(nb) = b.node() {
                    return Expr::sub(a, nb.clone());
                }
                Expr::wrap(Node::Add(a, b))
            }
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => {
                if let Node::Neg(nb) = b.node() {
                    return Expr::add(a, nb.clone());
                }
                Expr::wrap(Node::Sub(a, b))
            }
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => return Expr::constant(x * y),
            (Some(x), _) if x == 0.0 => return Expr::constant(0.0),
            (_, Some(y)) if y == 0.0 => return Expr::constant(0.0),
            (Some(x), _) if x == 1.0 => return b,
            (_, Some(y)) if y == 1.0 => return a,
            (Some(x), _) if x == -1.0 => return Expr::neg(b),
            (_, Some(y)) if y == -1.0 => return Expr::neg(a),
            (None, Some(_)) => return Expr::mul(b, a),
            _ => {}
        }
        if let (Some(x), Node::Mul(l, r)) = (a.as_const(), b.node()) {
            if let Some(y) = l.as_const() {
                return Expr::mul(Expr::constant(x * y), r.clone());
            }
        }
        match (a.node(), b.node()) {
            (Node::Neg(na), Node::Neg(nb)) => Expr::mul(na.clone(), nb.clone()),
            (Node::Neg(na), _) => Expr::neg(Expr::mul(na.clone(), b)),
            (_, Node::Neg(nb)) => Expr::neg(Expr::mul(a, nb.clone())),
            _ => Expr::wrap(Node::Mul(a, b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x / y),
            (Some(x), _) if x == 0.0 => Expr::constant(0.0),
            (_, Some(y)) if y == 1.0 => a,
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => match a.node() {
                Node::Neg(na) => Expr::neg(Expr::div(na.clone(), b)),
                _ => Expr::wrap(Node::Div(a, b)),
            },
        }
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(real_pow(x, y)),
            (_, Some(y)) if y == 1.0 => a,
            (_, Some(y)) if y == 0.0 => Expr::constant(1.0),
            (Some(x), _) if x == 1.0 => Expr::constant(1.0),
            _ => Expr::wrap(Node::Pow(a, b)),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        match a.as_const() {
            Some(v) => Expr::constant(f.apply(v)),
            None => Expr::wrap(Node::Call(f, a)),
        }
    }

    /// `outer(inner(x))`.
    pub fn compose(outer: &Expr, inner: &Expr) -> Expr {
        if !outer.has_var() {
            return outer.clone();
        }
        if matches!(outer.node(), Node::Var) {
            return inner.clone();
        }
        if matches!(inner.node(), Node::Var) {
            return outer.clone();
        }
        if let Some(v) = inner.as_const() {
            return Expr::constant(outer.eval(v));
        }
        Expr::wrap(Node::Compose(outer.clone(), inner.clone()))
    }

    pub fn has_var(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Param(_) => false,
            Node::Var => true,
            Node::Neg(a) | Node::Call(_, a) => a.has_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.has_var() || b.has_var()
            }
            Node::Compose(o, i) => o.has_var() && i.has_var(),
        }
    }

    pub fn free_params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) | Node::Var => {}
            Node::Param(n) => {
                out.insert(n.clone());
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_params(out),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b)
            | Node::Compose(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// Replace parameters by constants, folding as it goes.
    pub fn bind(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> crate::Result<Expr> {
        Ok(match self.node() {
            Node::Const(_) | Node::Var => self.clone(),
            Node::Param(n) => match lookup(n) {
                Some(v) => Expr::constant(v),
                None => return Err(crate::Error::UnknownIdentifier { name: n.clone() }),
            },
            Node::Neg(a) => Expr::neg(a.bind(lookup)?),
            Node::Add(a, b) => Expr::add(a.bind(lookup)?, b.bind(lookup)?),
            Node::Sub(a, b) => Expr::sub(a.bind(lookup)?, b.bind(lookup)?),
            Node::Mul(a, b) => Expr::mul(a.bind(lookup)?, b.bind(lookup)?),
            Node::Div(a, b) => Expr::div(a.bind(lookup)?, b.bind(lookup)?),
            Node::Pow(a, b) => Expr::pow(a.bind(lookup)?, b.bind(lookup)?),
            Node::Call(f, a) => Expr::call(*f, a.bind(lookup)?),
            Node::Compose(o, i) => Expr::compose(&o.bind(lookup)?, &i.bind(lookup)?),
        })
    }

    /// Evaluate at `x`; unbound parameters evaluate to NaN.
    pub fn eval(&self, x: f64) -> f64 {
        match self.node() {
            Node::Const(v) => *v,
            Node::Var => x,
            Node::Param(_) => f64::NAN,
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Pow(a, b) => real_pow(a.eval(x), b.eval(x)),
            Node::Call(f, a) => f.apply(a.eval(x)),
            Node::Compose(o, i) => o.eval(i.eval(x)),
        }
    }

    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var | Node::Param(_) => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.size(),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b)
            | Node::Compose(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Const(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, var: Option<&Expr>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "(")?;
                e.write(f, var)?;
                write!(f, ")")
            } else {
                e.write(f, var)
            }
        };
        match self.node() {
            Node::Const(v) => write_number(f, *v),
            Node::Var => match var {
                Some(inner) => {
                    write!(f, "(")?;
                    inner.write(f, None)?;
                    write!(f, ")")
                }
                None => write!(f, "x"),
            },
            Node::Param(n) => write!(f, "{n}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                child(f, a, 4)
            }
            Node::Add(a, b) => {
                child(f, a, 1)?;
                write!(f, " + ")?;
                child(f, b, 2)
            }
            Node::Sub(a, b) => {
                child(f, a, 1)?;
                write!(f, " - ")?;
                child(f, b, 2)
            }
            Node::Mul(a, b) => {
                child(f, a, 2)?;
                write!(f, "*")?;
                child(f, b, 3)
            }
            Node::Div(a, b) => {
                child(f, a, 2)?;
                write!(f, "/")?;
                child(f, b, 4)
            }
            Node::Pow(a, b) => {
                child(f, a, 5)?;
                write!(f, "^")?;
                child(f, b, 4)
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write(f, var)?;
                write!(f, ")")
            }
            Node::Compose(o, i) => {
                // Render by substitution so the text parses back.
                let rendered = RenderSubst { outer: o, inner: i, var };
                write!(f, "({rendered})")
            }
        }
    }
}

struct RenderSubst<'a> {
    outer: &'a Expr,
    inner: &'a Expr,
    var: Option<&'a Expr>,
}

impl fmt::Display for RenderSubst<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.var {
            None => self.outer.write(f, Some(self.inner)),
            Some(v) => {
                let substituted = Expr::compose(self.inner, v);
                self.outer.write(f, Some(&substituted))
            }
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v == std::f64::consts::PI {
        return write!(f, "pi");
    }
    if v < 0.0 {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, None)
    }
}

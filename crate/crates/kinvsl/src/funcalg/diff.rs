use super::expr::{Expr, Func, Node};

/// Exact derivative with respect to `x`. Parameters are constants.
pub fn differentiate(e: &Expr) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Param(_) => Expr::constant(0.0),
        Node::Var => Expr::constant(1.0),
        Node::Neg(a) => Expr::neg(differentiate(a)),
        Node::Add(a, b) => Expr::add(differentiate(a), differentiate(b)),
        Node::Sub(a, b) => Expr::sub(differentiate(a), differentiate(b)),
        Node::Mul(a, b) => {
            if !a.has_var() {
                return Expr::mul(a.clone(), differentiate(b));
            }
            if !b.has_var() {
                return Expr::mul(b.clone(), differentiate(a));
            }
            Expr::add(
                Expr::mul(differentiate(a), b.clone()),
                Expr::mul(a.clone(), differentiate(b)),
            )
        }
        Node::Div(a, b) => {
            if !b.has_var() {
                return Expr::div(differentiate(a), b.clone());
            }
            if !a.has_var() {
                // (c/b)' = -c b' / b^2
                return Expr::neg(Expr::div(
                    Expr::mul(a.clone(), differentiate(b)),
                    Expr::pow(b.clone(), Expr::constant(2.0)),
                ));
            }
            Expr::div(
                Expr::sub(
                    Expr::mul(differentiate(a), b.clone()),
                    Expr::mul(a.clone(), differentiate(b)),
                ),
                Expr::pow(b.clone(), Expr::constant(2.0)),
            )
        }
        Node::Pow(a, b) => {
            if !b.has_var() {
                let reduced = Expr::pow(a.clone(), Expr::sub(b.clone(), Expr::constant(1.0)));
                return Expr::mul(Expr::mul(b.clone(), reduced), differentiate(a));
            }
            let ln_a = Expr::call(Func::Ln, a.clone());
            if !a.has_var() {
                return Expr::mul(Expr::mul(e.clone(), ln_a), differentiate(b));
            }
            Expr::mul(
                e.clone(),
                Expr::add(
                    Expr::mul(differentiate(b), ln_a),
                    Expr::div(Expr::mul(b.clone(), differentiate(a)), a.clone()),
                ),
            )
        }
        Node::Call(f, a) => {
            let da = differentiate(a);
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Ln => Expr::div(Expr::constant(1.0), a.clone()),
                Func::Sqrt => Expr::div(Expr::constant(0.5), e.clone()),
                Func::Sin => Expr::call(Func::Cos, a.clone()),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, a.clone())),
                Func::Tan => Expr::add(
                    Expr::constant(1.0),
                    Expr::pow(e.clone(), Expr::constant(2.0)),
                ),
                Func::Atan => Expr::div(
                    Expr::constant(1.0),
                    Expr::add(Expr::constant(1.0), Expr::pow(a.clone(), Expr::constant(2.0))),
                ),
            };
            Expr::mul(outer, da)
        }
        Node::Compose(o, i) => Expr::mul(Expr::compose(&differentiate(o), i), differentiate(i)),
    }
}

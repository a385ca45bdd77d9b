use crate::qp::{PadicScalar, Valuation};

use super::TermError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinDerivative {
    /// The builtin is locally constant on its domain, so its derivative is
    /// identically zero.
    LocallyConstant,
    Unknown,
}

/// A registered builtin: evaluator, domain (enforced by the evaluator), and
/// derivative rule.
pub struct BuiltinSpec {
    pub name: &'static str,
    pub arity: usize,
    pub domain: &'static str,
    pub evaluate: fn(&[PadicScalar]) -> Result<PadicScalar, TermError>,
    pub derivative: BuiltinDerivative,
}

pub static BUILTINS: &[BuiltinSpec] = &[BuiltinSpec {
    name: "exloc2",
    arity: 1,
    domain: "ord(x) >= 1 or x = 0",
    evaluate: eval_exloc2,
    derivative: BuiltinDerivative::LocallyConstant,
}];

pub fn lookup_builtin(name: &str) -> Option<&'static BuiltinSpec> {
    BUILTINS.iter().find(|b| b.name == name)
}

/// The `C^1` function with zero derivative that is not locally Lipschitz at 0.
///
/// `p·Z_p \ {0}` is cut into the balls `b + b^3·Z_p`. At level `n = ord(x)`
/// the ball of `x = p^n·u` is indexed by `u mod p^{2n}`; the ball with
/// `u ≡ 1` is the special one and `g` takes the value `b^2 = p^{2n}` there,
/// `0` on every other ball, and `g(0) = 0`.
fn eval_exloc2(args: &[PadicScalar]) -> Result<PadicScalar, TermError> {
    let x = &args[0];
    let ctx = x.ctx();
    match x.ord() {
        Valuation::PlusInfinity => Ok(ctx.zero()),
        Valuation::Finite(n) if n >= 1 => {
            let special = x.ac(2 * n as u32).residue == 1;
            Ok(if special { ctx.power(2 * n) } else { ctx.zero() })
        }
        Valuation::Finite(_) => Err(TermError::BuiltinDomain { name: "exloc2".into(), argument: x.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qp::PrimeContext;

    #[test]
    fn exloc2_values() {
        let c = PrimeContext::new(3).unwrap();
        let g = |x: PadicScalar| eval_exloc2(&[x]).unwrap();
        assert_eq!(g(c.int(9)), c.int(81));
        assert_eq!(g(c.int(252)), c.zero());
        // 9 + 3^6·k stays in the special ball at level 2.
        assert_eq!(g(c.int(9 + 729 * 5)), c.int(81));
        assert_eq!(g(c.zero()), c.zero());
        assert!(eval_exloc2(&[c.int(2)]).is_err());
    }
}

//! Fixtures shared by unit tests.

use crate::dynamic::{Dir, ProcExpr};
use crate::lmumu::StateExpr;
use crate::module::{AtomicModule, Builtin, Valuation};
use crate::structure::{Domain, Signature, Universe, Vocabulary, DEFAULT_CAP};

/// Domain `{a,b}`, vocabulary `{P/1, Q/1}`, modules `Full(X)`, `Any(X)`
/// and `Any2(X,Y)` over unary parameters.
pub fn pq() -> (Valuation, Universe) {
    let sig = Signature::new(Domain::new(["a", "b"]).unwrap(), Vocabulary::new([("P", 1), ("Q", 1)]).unwrap())
        .unwrap();
    let val = Valuation::new(sig.clone())
        .with_module(AtomicModule::builtin("Full", vec![("X".into(), 1)], Builtin::Full).unwrap())
        .with_module(AtomicModule::builtin("Any", vec![("X".into(), 1)], Builtin::Any).unwrap())
        .with_module(
            AtomicModule::builtin("Any2", vec![("X".into(), 1), ("Y".into(), 1)], Builtin::Any).unwrap(),
        );
    (val, Universe::new(sig, DEFAULT_CAP).unwrap())
}

/// Makes `P` full, keeps `Q`.
pub fn set_p() -> ProcExpr {
    ProcExpr::action("Full", [("P", Dir::Out)])
}

/// `P = {a,b}`.
pub fn full_p() -> StateExpr {
    StateExpr::prop("Full", ["P"])
}

pub fn p_of(u: &Universe, i: usize) -> u128 {
    u.sig().field(u.bits_at(i), 0)
}

pub fn q_of(u: &Universe, i: usize) -> u128 {
    u.sig().field(u.bits_at(i), 1)
}

//! Concrete syntax for expressions. Binary operators are always
//! parenthesized, so printing then parsing gives back the same tree.

use std::fmt::{self, Display, Formatter};

use crate::dynamic::{Dir, ProcExpr};
use crate::flat::ast::{FlatExpr, Operand};
use crate::lmumu::StateExpr;

impl Display for Operand {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => f.write_str(v),
            Operand::Const(c) => write!(f, "{c}"),
        }
    }
}

fn keep_list(keep: &std::collections::BTreeSet<String>) -> String {
    keep.iter().cloned().collect::<Vec<_>>().join(",")
}

impl Display for FlatExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some((a, b)) = self.as_intersection() {
            return write!(f, "({a} & {b})");
        }
        match self {
            FlatExpr::Bottom => f.write_str("bot"),
            FlatExpr::Atom { module, args } => write!(f, "{module}({})", args.join(",")),
            FlatExpr::Var(z) => f.write_str(z),
            FlatExpr::Union(a, b) => write!(f, "({a} | {b})"),
            FlatExpr::Complement(a) => write!(f, "-{a}"),
            FlatExpr::Project { keep, inner } => write!(f, "pi{{{}}} {inner}", keep_list(keep)),
            FlatExpr::Select { lhs, rhs, inner } => write!(f, "sel[{lhs} == {rhs}] {inner}"),
            FlatExpr::Lfp { var, body } => write!(f, "(mu {var} . {body})"),
        }
    }
}

impl ProcExpr {
    /// Whether the printed form needs no parentheses before a postfix operator.
    fn is_primary(&self) -> bool {
        if self.as_kleene_star().is_some() {
            return true;
        }
        matches!(
            self,
            ProcExpr::Bottom
                | ProcExpr::Diag
                | ProcExpr::Test { .. }
                | ProcExpr::Action { .. }
                | ProcExpr::Var(_)
                | ProcExpr::Union(..)
                | ProcExpr::Compose(..)
                | ProcExpr::Lfp { .. }
                | ProcExpr::Count { .. }
                | ProcExpr::TestEq(_)
                | ProcExpr::TestNeq(_)
                | ProcExpr::ConstTest { .. }
                | ProcExpr::StateTest(_)
        ) || self.is_intersection()
    }

    fn is_intersection(&self) -> bool {
        if let ProcExpr::Complement(inner) = self {
            if let ProcExpr::Union(a, b) = inner.as_ref() {
                return matches!((a.as_ref(), b.as_ref()), (ProcExpr::Complement(_), ProcExpr::Complement(_)));
            }
        }
        false
    }

    fn postfix_operand(&self) -> String {
        if self.is_primary() {
            self.to_string()
        } else {
            format!("({self})")
        }
    }
}

impl Display for ProcExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(a) = self.as_kleene_star() {
            return write!(f, "{}*", a.postfix_operand());
        }
        if self.is_intersection() {
            if let ProcExpr::Complement(inner) = self {
                if let ProcExpr::Union(a, b) = inner.as_ref() {
                    if let (ProcExpr::Complement(a), ProcExpr::Complement(b)) = (a.as_ref(), b.as_ref()) {
                        return write!(f, "({a} & {b})");
                    }
                }
            }
        }
        match self {
            ProcExpr::Bottom => f.write_str("bot"),
            ProcExpr::Diag => f.write_str("diag"),
            ProcExpr::Test { module, args } => write!(f, "{module}({})?", args.join(",")),
            ProcExpr::Action { module, args } => {
                let args: Vec<String> = args
                    .iter()
                    .map(|(a, d)| match d {
                        Dir::In => format!("in {a}"),
                        Dir::Out => format!("out {a}"),
                    })
                    .collect();
                write!(f, "{module}({})", args.join(", "))
            }
            ProcExpr::Var(z) => f.write_str(z),
            ProcExpr::Union(a, b) => write!(f, "({a} | {b})"),
            ProcExpr::Compose(a, b) => write!(f, "({a} ; {b})"),
            ProcExpr::Complement(a) => write!(f, "-{a}"),
            ProcExpr::Project { keep, inner } => write!(f, "pi{{{}}} {inner}", keep_list(keep)),
            ProcExpr::Select { lhs, rhs, inner } => write!(f, "sel[{lhs} == {rhs}] {inner}"),
            ProcExpr::Lfp { var, body } => write!(f, "(mu {var} . {body})"),
            ProcExpr::Down(a) => write!(f, "dn {a}"),
            ProcExpr::Up(a) => write!(f, "up {a}"),
            ProcExpr::Neg(a) => write!(f, "neg {a}"),
            ProcExpr::Count { inner, min, max } => write!(f, "{}^{{{min},{max}}}", inner.postfix_operand()),
            ProcExpr::Reverse(a) => write!(f, "rev {a}"),
            ProcExpr::TestEq(a) => write!(f, "{}=?", a.postfix_operand()),
            ProcExpr::TestNeq(a) => write!(f, "{}!=?", a.postfix_operand()),
            ProcExpr::ConstTest { var, value, positive } => {
                write!(f, "test[{var} {} {value}]", if *positive { "==" } else { "!=" })
            }
            ProcExpr::StateTest(phi) => write!(f, "{{{phi}}}?"),
        }
    }
}

impl Display for StateExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.is_top() {
            return f.write_str("true");
        }
        match self {
            StateExpr::Prop { module, args } => write!(f, "prop {module}({})", args.join(",")),
            StateExpr::SetVar(x) => f.write_str(x),
            StateExpr::Or(a, b) => write!(f, "({a} | {b})"),
            StateExpr::And(a, b) => write!(f, "({a} & {b})"),
            StateExpr::Not(a) => write!(f, "!{a}"),
            StateExpr::Diamond(p, a) => write!(f, "<{p}> {a}"),
            StateExpr::Necessity(p, a) => write!(f, "[{p}] {a}"),
            StateExpr::Lfp { var, body } => write!(f, "(mu {var} . {body})"),
        }
    }
}

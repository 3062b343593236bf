//! Canonical text for formulas.
//!
//! Printing inserts the fewest parentheses that re-parse to the same tree,
//! with one deliberate exception: a quantified block appearing as an
//! operand is always parenthesized, which keeps the output unambiguous
//! under maximal quantifier scoping. Parsing the printed text yields the
//! original AST; agreement shorthands print as their expansion.

use super::{FormulaNode, LtlBody, Quantifier};

// Precedence, tightest = 7 (atoms). Unary 6, U 5, & 4, | 3, ^ 2, -> 1, <-> 0.
fn body_prec(b: &LtlBody) -> u8 {
    match b {
        LtlBody::Atom { .. } | LtlBody::InSet { .. } => 7,
        LtlBody::Not(_) | LtlBody::Next(_) | LtlBody::Eventually(_) | LtlBody::Globally(_) => 6,
        LtlBody::Until(_, _) => 5,
        LtlBody::And(_, _) => 4,
        LtlBody::Or(_, _) => 3,
        LtlBody::Xor(_, _) => 2,
        LtlBody::Implies(_, _) => 1,
        LtlBody::Iff(_, _) => 0,
    }
}

fn print_body_at(b: &LtlBody, required: u8, out: &mut String) {
    let p = body_prec(b);
    let wrap = p < required;
    if wrap {
        out.push('(');
    }
    match b {
        LtlBody::Atom { prop, var } => {
            out.push_str(prop);
            out.push('[');
            out.push_str(var);
            out.push(']');
        }
        LtlBody::InSet { var, set } => {
            out.push_str(var);
            out.push_str(" |> ");
            out.push_str(set);
        }
        LtlBody::Not(a) => {
            out.push('!');
            print_body_at(a, 6, out);
        }
        LtlBody::Next(a) => {
            out.push_str("X ");
            print_body_at(a, 6, out);
        }
        LtlBody::Eventually(a) => {
            out.push_str("F ");
            print_body_at(a, 6, out);
        }
        LtlBody::Globally(a) => {
            out.push_str("G ");
            print_body_at(a, 6, out);
        }
        // U and -> associate right, the rest left.
        LtlBody::Until(a, b2) => {
            print_body_at(a, 6, out);
            out.push_str(" U ");
            print_body_at(b2, 5, out);
        }
        LtlBody::And(a, b2) => {
            print_body_at(a, 4, out);
            out.push_str(" & ");
            print_body_at(b2, 5, out);
        }
        LtlBody::Or(a, b2) => {
            print_body_at(a, 3, out);
            out.push_str(" | ");
            print_body_at(b2, 4, out);
        }
        LtlBody::Xor(a, b2) => {
            print_body_at(a, 2, out);
            out.push_str(" ^ ");
            print_body_at(b2, 3, out);
        }
        LtlBody::Implies(a, b2) => {
            print_body_at(a, 2, out);
            out.push_str(" -> ");
            print_body_at(b2, 1, out);
        }
        LtlBody::Iff(a, b2) => {
            print_body_at(a, 0, out);
            out.push_str(" <-> ");
            print_body_at(b2, 1, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

fn print_quant(q: &Quantifier, out: &mut String) {
    out.push_str(if q.exists() { "exists " } else { "forall " });
    match q {
        Quantifier::Set { var, .. } => {
            out.push_str(var);
        }
        Quantifier::SetMM { var, polarity, guard, .. } => {
            out.push('(');
            out.push_str(var);
            out.push_str(", ");
            out.push_str(&polarity.to_string());
            out.push_str(", ");
            print_node_at(guard, 0, out);
            out.push(')');
        }
        Quantifier::Trace { var, range, .. } => {
            out.push_str(var);
            out.push_str(" in ");
            out.push_str(range);
        }
    }
    out.push_str(". ");
}

fn node_prec(n: &FormulaNode) -> u8 {
    match n {
        FormulaNode::Body(b) => body_prec(b),
        // Quantified blocks are parenthesized whenever they are operands.
        FormulaNode::Quant(_, _) => 0,
        FormulaNode::Not(_) => 6,
        FormulaNode::And(_, _) => 4,
        FormulaNode::Or(_, _) => 3,
        FormulaNode::Xor(_, _) => 2,
        FormulaNode::Implies(_, _) => 1,
        FormulaNode::Iff(_, _) => 0,
    }
}

fn print_node_at(n: &FormulaNode, required: u8, out: &mut String) {
    if let FormulaNode::Body(b) = n {
        print_body_at(b, required, out);
        return;
    }
    let wrap = match n {
        FormulaNode::Quant(_, _) => required > 0,
        _ => node_prec(n) < required,
    };
    if wrap {
        out.push('(');
    }
    match n {
        FormulaNode::Body(_) => unreachable!("handled above"),
        FormulaNode::Quant(q, scope) => {
            print_quant(q, out);
            print_node_at(scope, 0, out);
        }
        FormulaNode::Not(a) => {
            out.push('!');
            print_node_at(a, 6, out);
        }
        FormulaNode::And(a, b) => {
            print_node_at(a, 4, out);
            out.push_str(" & ");
            print_node_at(b, 5, out);
        }
        FormulaNode::Or(a, b) => {
            print_node_at(a, 3, out);
            out.push_str(" | ");
            print_node_at(b, 4, out);
        }
        FormulaNode::Xor(a, b) => {
            print_node_at(a, 2, out);
            out.push_str(" ^ ");
            print_node_at(b, 3, out);
        }
        FormulaNode::Implies(a, b) => {
            print_node_at(a, 2, out);
            out.push_str(" -> ");
            print_node_at(b, 1, out);
        }
        FormulaNode::Iff(a, b) => {
            print_node_at(a, 0, out);
            out.push_str(" <-> ");
            print_node_at(b, 1, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

/// Canonical text for a formula tree.
pub fn print_node(n: &FormulaNode) -> String {
    let mut out = String::new();
    print_node_at(n, 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse_formula, Formula};
    use super::*;
    use crate::traces::Alphabet;

    fn alpha() -> Alphabet {
        Alphabet::new(["x", "y"]).unwrap()
    }

    fn parse(text: &str) -> Formula {
        parse_formula(text, &alpha()).unwrap()
    }

    #[test]
    fn print_then_parse_is_identity_on_asts() {
        let samples = [
            "forall p in D. !x[p] U (x[p] & X G !x[p])",
            "exists p in D. x[p]",
            "forall p in D. exists p' in D. F (x[p] & X x[p'])",
            "(exists p in D. x[p]) & (forall q in D. y[q]) & x[r]",
            "exists (X, min, forall p in X. p |> D). exists q in X. x[q] | y[q]",
            "forall X. (forall p in X. p |> D) -> exists q in X. x[q]",
            "!(exists p in ALL. x[p] ^ y[p])",
            "x[p] U y[p] U x[q] & y[q] | x[r] -> y[r] <-> x[s]",
            "forall p in D. forall q in D. p =_{x, y} q",
            "X X x[p] U G (y[p] -> F x[p])",
        ];
        for text in samples {
            let f = parse(text);
            let printed = print_node(f.node());
            let g = parse(&printed);
            assert_eq!(f, g, "round-trip changed the tree for {text:?}\nprinted: {printed}");
        }
    }

    #[test]
    fn parse_then_print_is_identity_on_canonical_text() {
        let canonical = [
            "forall p in D. !x[p] U (x[p] & X G !x[p])",
            "(exists p in D. x[p]) & (forall q in D. y[q])",
            "exists (X, min, forall p in X. p |> D). exists q in X. x[q]",
            "x[p] & y[p] | x[q]",
            "x[p] & (y[p] | x[q])",
            "(x[p] U y[p]) U x[q]",
            "x[p] U y[p] U x[q]",
            "(x[p] -> y[p]) -> x[q]",
            "x[p] -> y[p] -> x[q]",
        ];
        for text in canonical {
            let f = parse(text);
            assert_eq!(print_node(f.node()), text);
        }
    }

    #[test]
    fn printer_wraps_quantifier_operands() {
        let f = parse("x[p] <-> exists q in D. y[q]");
        assert_eq!(print_node(f.node()), "x[p] <-> (exists q in D. y[q])");
        let g = parse(&print_node(f.node()));
        assert_eq!(f, g);
    }

    #[test]
    fn unary_chains_print_without_parens() {
        let f = parse("!X G !x[p]");
        assert_eq!(print_node(f.node()), "!X G !x[p]");
    }
}

//! Renders a `Program` back to source text. Rendering preserves the surface
//! (shorthand) form of every law, so parse-render-parse is the identity.

use crate::ast::*;

pub fn render_program(p: &Program) -> String {
    let mut out = String::new();
    if !p.sorts.is_empty() {
        out.push_str(":- sorts\n");
        let lines = render_sorts(p);
        for (i, line) in lines.iter().enumerate() {
            out.push_str("    ");
            out.push_str(line);
            out.push_str(if i + 1 == lines.len() { ".\n\n" } else { ";\n" });
        }
    }
    if !p.objects.is_empty() {
        out.push_str(":- objects\n");
        for (i, o) in p.objects.iter().enumerate() {
            out.push_str(&format!("    {} :: {}", o.spec, o.sort));
            out.push_str(if i + 1 == p.objects.len() { ".\n\n" } else { ";\n" });
        }
    }
    if !p.variables.is_empty() {
        out.push_str(":- variables\n");
        for (i, v) in p.variables.iter().enumerate() {
            out.push_str(&format!("    {} :: {}", v.name, v.sort));
            out.push_str(if i + 1 == p.variables.len() { ".\n\n" } else { ";\n" });
        }
    }
    if !p.constants.is_empty() {
        out.push_str(":- constants\n");
        for (i, c) in p.constants.iter().enumerate() {
            out.push_str(&format!("    {}", render_constant(c)));
            out.push_str(if i + 1 == p.constants.len() { ".\n\n" } else { ";\n" });
        }
    }
    for law in &p.laws {
        out.push_str(&render_law(&law.law));
        out.push_str("\n");
    }
    if !p.laws.is_empty() && !p.queries.is_empty() {
        out.push('\n');
    }
    for q in &p.queries {
        out.push_str(&render_query(q));
        out.push('\n');
    }
    out
}

fn render_sorts(p: &Program) -> Vec<String> {
    // bare names first so declaration order survives the reparse, then one
    // item per supersort edge
    let mut lines: Vec<String> = p.sorts.iter().map(|s| s.name.clone()).collect();
    for s in &p.sorts {
        for sup in &s.supersorts {
            lines.push(format!("{} >> {}", sup, s.name));
        }
    }
    lines
}

fn render_constant(c: &ConstantDecl) -> String {
    let head = if c.arg_sorts.is_empty() {
        c.name.clone()
    } else {
        format!("{}({})", c.name, c.arg_sorts.join(", "))
    };
    let kind = match &c.kind {
        ConstantKind::InertialFluent(v) => format!("inertialFluent({v})"),
        ConstantKind::AdditiveFluent(v) => format!("additiveFluent({v})"),
        ConstantKind::ExogenousAction => "exogenousAction".to_string(),
        ConstantKind::AdditiveAction(v) => format!("additiveAction({v})"),
        ConstantKind::Attribute { value, action, action_args } => {
            if action_args.is_empty() {
                format!("attribute({value}) of {action}")
            } else {
                format!("attribute({value}) of {action}({})", action_args.join(", "))
            }
        }
    };
    format!("{head} :: {kind}")
}

pub fn render_law(law: &CausalLaw) -> String {
    match law {
        CausalLaw::Conditional { head, cond, after } => {
            let mut s = head.to_string();
            if *cond != Formula::True {
                s.push_str(&format!(" if {cond}"));
            }
            if let Some(a) = after {
                if *cond == Formula::True {
                    // `F after H` keeps its surface form; `F if true after H` never occurs
                    s.push_str(&format!(" after {a}"));
                } else {
                    s.push_str(&format!(" after {a}"));
                }
            }
            format!("{s}.")
        }
        CausalLaw::Causes { action, effect, cond } => {
            if *cond == Formula::True {
                format!("{action} causes {effect}.")
            } else {
                format!("{action} causes {effect} if {cond}.")
            }
        }
        CausalLaw::Impossible { body } => format!("impossible {body}."),
        CausalLaw::Nonexecutable { actions, cond } => {
            if *cond == Formula::True {
                format!("nonexecutable {actions}.")
            } else {
                format!("nonexecutable {actions} if {cond}.")
            }
        }
        CausalLaw::Default { atom, cond, after } => {
            let mut s = format!("default {atom}");
            if *cond != Formula::True {
                s.push_str(&format!(" if {cond}"));
            }
            if let Some(a) = after {
                s.push_str(&format!(" after {a}"));
            }
            format!("{s}.")
        }
        CausalLaw::Always { body } => format!("always {body}."),
        CausalLaw::Increments { action, target, amount, cond } => {
            if *cond == Formula::True {
                format!("{action} increments {target} by {amount}.")
            } else {
                format!("{action} increments {target} by {amount} if {cond}.")
            }
        }
        CausalLaw::Decrements { action, target, amount, cond } => {
            if *cond == Formula::True {
                format!("{action} decrements {target} by {amount}.")
            } else {
                format!("{action} decrements {target} by {amount} if {cond}.")
            }
        }
    }
}

pub fn render_query(q: &Query) -> String {
    let mut items = Vec::new();
    if let Some(label) = &q.label {
        items.push(format!("label :: {label}"));
    }
    if let Some(n) = q.maxstep {
        items.push(format!("maxstep :: {n}"));
    }
    for t in &q.timed {
        items.push(format!("{}: {}", t.step, t.formula));
    }
    let mut out = String::from(":- query\n");
    for (i, item) in items.iter().enumerate() {
        out.push_str("    ");
        out.push_str(item);
        out.push_str(if i + 1 == items.len() { ".\n" } else { ";\n" });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, SourceProgram};

    fn roundtrip(text: &str) {
        let p1 = parse_program(&SourceProgram::anonymous(text)).expect("first parse");
        let rendered = render_program(&p1);
        let p2 = parse_program(&SourceProgram::anonymous(&rendered))
            .unwrap_or_else(|e| panic!("reparse failed on:\n{rendered}\nerrors: {e:?}"));
        assert_eq!(
            crate::ast::strip_positions(&p1),
            crate::ast::strip_positions(&p2),
            "round-trip mismatch; rendered:\n{rendered}"
        );
    }

    #[test]
    fn roundtrip_blocks_world() {
        roundtrip(
            ":- sorts\n   loc >> block.\n\
             :- objects\n   b1, b2, b3, b4 :: block;\n   table :: loc.\n\
             :- constants\n   loc(block) :: inertialFluent(loc);\n   move(block, loc) :: exogenousAction.\n\
             move(B,L) causes loc(B)=L.\n\
             nonexecutable move(B,L) if loc(B1)=B.\n\
             impossible loc(B1)=B & loc(B2)=B & B1\\=B2.",
        );
    }

    #[test]
    fn causes_law_renders_shorthand() {
        let p = parse_program(&SourceProgram::anonymous("move(B,L) causes loc(B)=L."))
            .unwrap();
        let text = render_law(&p.laws[0].law);
        assert!(text.starts_with("move(B, L) causes"));
        assert!(!text.contains("after"));
    }

    #[test]
    fn roundtrip_queries_and_ranges() {
        roundtrip(
            ":- sorts vessel; location; integer.\n\
             :- objects boat :: vessel; bank1, bank2 :: location; 0..10 :: integer.\n\
             :- variables V :: vessel; N, N1 :: integer.\n\
             :- constants cross(vessel) :: exogenousAction;\n\
             numCrossing(vessel) :: attribute(integer) of cross(vessel);\n\
             loc(vessel) :: inertialFluent(location).\n\
             cross(V) causes loc(V) = bank2 if loc(V) = bank1.\n\
             nonexecutable cross(V) if N1 + N > 2 & N1 = numCrossing(V).\n\
             :- query label :: main; maxstep :: 4; 0: loc(boat) = bank1; maxstep: loc(boat) = bank2.",
        );
    }

    #[test]
    fn roundtrip_formula_shapes() {
        roundtrip(
            "p if (q | r) & ~s.\n\
             always (a = N1 & b = N2) -> N1 + N2 < 7.\n\
             default c = none.\n\
             x increments y by 2 if z.\n\
             w after u & v.",
        );
    }
}

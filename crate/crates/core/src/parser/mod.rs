//! Recursive-descent parser for the BC+ input language of the appendix
//! listings: declaration sections, causal laws, and query blocks.

mod lexer;
mod render;

pub use render::render_program;

use crate::ast::*;
use crate::diag::{Diagnostic, Severity};
use lexer::{lex, Tok, Token};

/// Source text plus a display name for diagnostics.
#[derive(Debug, Clone)]
pub struct SourceProgram {
    pub text: String,
    pub origin: String,
}

impl SourceProgram {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SourceProgram {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn anonymous(text: impl Into<String>) -> Self {
        SourceProgram::new(text, "<input>")
    }
}

/// Parses a program; any syntax error yields the diagnostics instead.
pub fn parse_program(src: &SourceProgram) -> Result<Program, Vec<Diagnostic>> {
    let (program, diags) = parse_program_lenient(src);
    if diags.iter().any(|d| d.severity == Severity::Error) {
        Err(diags)
    } else {
        Ok(program)
    }
}

/// Parses as much of the program as possible, collecting diagnostics for the
/// statements that fail. Parsing is total: any input yields a (possibly
/// empty) program plus diagnostics.
pub fn parse_program_lenient(src: &SourceProgram) -> (Program, Vec<Diagnostic>) {
    let (tokens, lex_errors) = lex(&src.text);
    let mut diags: Vec<Diagnostic> = lex_errors
        .into_iter()
        .map(|e| Diagnostic::error(e.message, e.pos))
        .collect();
    let mut program = Program::default();

    // statements are period-terminated; recover at each period
    let mut start = 0;
    while start < tokens.len() {
        let mut end = start;
        while end < tokens.len() && tokens[end].tok != Tok::Period {
            end += 1;
        }
        let terminated = end < tokens.len();
        let stmt = &tokens[start..end];
        if stmt.is_empty() {
            start = end + 1;
            continue;
        }
        if !terminated {
            diags.push(Diagnostic::error(
                "unexpected end of input: statement is missing its terminating '.'",
                stmt.last().unwrap().pos,
            ));
        }
        let mut p = StmtParser::new(stmt);
        match p.parse_statement(&mut program) {
            Ok(()) => {
                if let Some(extra) = p.peek_token() {
                    diags.push(Diagnostic::error(
                        format!("unexpected trailing input in statement: {:?}", extra.tok),
                        extra.pos,
                    ));
                }
            }
            Err(d) => diags.push(d),
        }
        start = end + 1;
    }
    (program, diags)
}

/// Parses a source expected to contain at least one `:- query` block and
/// returns the first one.
pub fn parse_query(src: &SourceProgram) -> Result<Query, Vec<Diagnostic>> {
    let (program, diags) = parse_program_lenient(src);
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(diags);
    }
    match program.queries.into_iter().next() {
        Some(q) => Ok(q),
        None => Err(vec![Diagnostic::error(
            "no ':- query' block found",
            Pos::default(),
        )]),
    }
}

/// Either a formula or a term; parenthesised sub-expressions stay ambiguous
/// until an operator or coercion decides.
enum PExpr {
    F(Formula),
    T(Term),
}

struct StmtParser<'a> {
    toks: &'a [Token],
    i: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> StmtParser<'a> {
    fn new(toks: &'a [Token]) -> Self {
        StmtParser { toks, i: 0 }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek_token(&self) -> Option<&Token> {
        self.toks.get(self.i)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.i + 1).map(|t| &t.tok)
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.i)
            .map(|t| t.pos)
            .or_else(|| self.toks.last().map(|t| t.pos))
            .unwrap_or_default()
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.i);
        self.i += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> PResult<Pos> {
        let pos = self.pos();
        if self.eat(tok) {
            Ok(pos)
        } else {
            Err(Diagnostic::error(
                format!("expected {what}"),
                pos,
            ))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if let Some(Tok::LIdent(s)) = self.peek() {
            if s == kw {
                self.i += 1;
                return true;
            }
        }
        false
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::LIdent(s)) if s == kw)
    }

    fn expect_lident(&mut self, what: &str) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::LIdent(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok((s, pos))
            }
            _ => Err(Diagnostic::error(format!("expected {what}"), pos)),
        }
    }

    fn parse_statement(&mut self, program: &mut Program) -> PResult<()> {
        if self.eat(&Tok::SectionIntro) {
            let (section, pos) = self.expect_lident("section name after ':-'")?;
            match section.as_str() {
                "sorts" => self.parse_sorts(program),
                "objects" => self.parse_objects(program),
                "variables" => self.parse_variables(program),
                "constants" | "constant" => self.parse_constants(program),
                "query" => self.parse_query_block(program),
                other => Err(Diagnostic::error(
                    format!("unknown section ':- {other}'"),
                    pos,
                )),
            }
        } else {
            let law = self.parse_law()?;
            program.laws.push(law);
            Ok(())
        }
    }

    fn parse_sorts(&mut self, program: &mut Program) -> PResult<()> {
        loop {
            let mut left = Vec::new();
            loop {
                let (name, pos) = self.expect_lident("sort name")?;
                left.push((name, pos));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            // `s1, s2 >> t1, t2` makes every left name a supersort of every right name
            while self.eat(&Tok::Supersort) {
                let mut right = Vec::new();
                loop {
                    let (name, pos) = self.expect_lident("sort name after '>>'")?;
                    right.push((name, pos));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                for (l, lpos) in &left {
                    declare_sort(program, l, *lpos, &[]);
                    for (r, rpos) in &right {
                        declare_sort(program, r, *rpos, &[l.clone()]);
                    }
                }
                left = right;
            }
            for (name, pos) in &left {
                declare_sort(program, name, *pos, &[]);
            }
            if !self.eat(&Tok::Semi) {
                break;
            }
            if self.peek().is_none() {
                break; // trailing semicolon before the period
            }
        }
        Ok(())
    }

    fn parse_objects(&mut self, program: &mut Program) -> PResult<()> {
        loop {
            let mut specs = Vec::new();
            loop {
                specs.push(self.parse_object_spec()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::DoubleColon, "'::' in object declaration")?;
            let (sort, _) = self.expect_lident("sort name in object declaration")?;
            for (spec, pos) in specs {
                program.objects.push(ObjectDecl { spec, sort: sort.clone(), pos });
            }
            if !self.eat(&Tok::Semi) {
                break;
            }
            if self.peek().is_none() {
                break;
            }
        }
        Ok(())
    }

    fn parse_object_spec(&mut self) -> PResult<(ObjectSpec, Pos)> {
        let pos = self.pos();
        let negative = self.eat(&Tok::Minus);
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.i += 1;
                let lo = if negative { -n } else { n };
                if self.eat(&Tok::DotDot) {
                    let hneg = self.eat(&Tok::Minus);
                    match self.peek().cloned() {
                        Some(Tok::Int(m)) => {
                            self.i += 1;
                            let hi = if hneg { -m } else { m };
                            if lo > hi {
                                return Err(Diagnostic::error(
                                    format!("invalid range {lo}..{hi}: lower bound exceeds upper bound"),
                                    pos,
                                ));
                            }
                            Ok((ObjectSpec::Range(lo, hi), pos))
                        }
                        _ => Err(Diagnostic::error("expected integer after '..'", self.pos())),
                    }
                } else {
                    Ok((ObjectSpec::Int(lo), pos))
                }
            }
            Some(Tok::LIdent(name)) if !negative => {
                self.i += 1;
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    loop {
                        let (s, _) = self.expect_lident("sort name in constructor object")?;
                        args.push(s);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(&Tok::RParen, "')' after constructor arguments")?;
                    Ok((ObjectSpec::Ctor(name, args), pos))
                } else {
                    Ok((ObjectSpec::Name(name), pos))
                }
            }
            _ => Err(Diagnostic::error("expected object name, integer, or range", pos)),
        }
    }

    fn parse_variables(&mut self, program: &mut Program) -> PResult<()> {
        loop {
            let mut names = Vec::new();
            loop {
                let pos = self.pos();
                match self.peek().cloned() {
                    Some(Tok::UIdent(v)) => {
                        self.i += 1;
                        names.push((v, pos));
                    }
                    _ => {
                        return Err(Diagnostic::error(
                            "expected variable name (capitalized identifier)",
                            pos,
                        ))
                    }
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::DoubleColon, "'::' in variable declaration")?;
            let (sort, _) = self.expect_lident("sort name in variable declaration")?;
            for (name, pos) in names {
                program.variables.push(VariableDecl { name, sort: sort.clone(), pos });
            }
            if !self.eat(&Tok::Semi) {
                break;
            }
            if self.peek().is_none() {
                break;
            }
        }
        Ok(())
    }

    fn parse_constants(&mut self, program: &mut Program) -> PResult<()> {
        loop {
            let mut heads = Vec::new();
            loop {
                let (name, pos) = self.expect_lident("constant name")?;
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        let apos = self.pos();
                        match self.peek().cloned() {
                            Some(Tok::LIdent(s)) => {
                                self.i += 1;
                                args.push(s);
                            }
                            Some(Tok::UIdent(v)) => {
                                return Err(Diagnostic::error(
                                    format!("variable {v} used as a constant argument sort; only sorts may appear in constant declarations"),
                                    apos,
                                ));
                            }
                            _ => {
                                return Err(Diagnostic::error(
                                    "expected sort name in constant argument list",
                                    apos,
                                ))
                            }
                        }
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(&Tok::RParen, "')' after constant arguments")?;
                }
                heads.push((name, args, pos));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::DoubleColon, "'::' in constant declaration")?;
            let kind = self.parse_constant_kind()?;
            for (name, arg_sorts, pos) in heads {
                program.constants.push(ConstantDecl {
                    name,
                    arg_sorts,
                    kind: kind.clone(),
                    pos,
                });
            }
            if !self.eat(&Tok::Semi) {
                break;
            }
            if self.peek().is_none() {
                break;
            }
        }
        Ok(())
    }

    fn parse_constant_kind(&mut self) -> PResult<ConstantKind> {
        let (kind_name, pos) = self.expect_lident("constant kind")?;
        let value_sort = if self.eat(&Tok::LParen) {
            let (s, _) = self.expect_lident("value sort")?;
            self.expect(&Tok::RParen, "')' after value sort")?;
            Some(if s == "boolean" { ValueSort::Boolean } else { ValueSort::Sort(s) })
        } else {
            None
        };
        match kind_name.as_str() {
            "inertialFluent" => Ok(ConstantKind::InertialFluent(
                value_sort.unwrap_or(ValueSort::Boolean),
            )),
            "additiveFluent" => match value_sort {
                Some(v) => Ok(ConstantKind::AdditiveFluent(v)),
                None => Err(Diagnostic::error(
                    "additiveFluent requires a value sort, e.g. additiveFluent(integer)",
                    pos,
                )),
            },
            "exogenousAction" => {
                if value_sort.is_some() {
                    Err(Diagnostic::error(
                        "exogenousAction takes no value sort; actions are boolean",
                        pos,
                    ))
                } else {
                    Ok(ConstantKind::ExogenousAction)
                }
            }
            "additiveAction" => match value_sort {
                Some(v) => Ok(ConstantKind::AdditiveAction(v)),
                None => Err(Diagnostic::error(
                    "additiveAction requires a value sort, e.g. additiveAction(integer)",
                    pos,
                )),
            },
            "attribute" => {
                let value = value_sort.ok_or_else(|| {
                    Diagnostic::error("attribute requires a value sort, e.g. attribute(integer)", pos)
                })?;
                if !self.eat_keyword("of") {
                    return Err(Diagnostic::error(
                        "attribute declaration requires 'of actionName(...)'",
                        self.pos(),
                    ));
                }
                let (action, _) = self.expect_lident("parent action name after 'of'")?;
                let mut action_args = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        let (s, _) = self.expect_lident("sort name in parent action arguments")?;
                        action_args.push(s);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(&Tok::RParen, "')' after parent action arguments")?;
                }
                Ok(ConstantKind::Attribute { value, action, action_args })
            }
            other => Err(Diagnostic::error(
                format!(
                    "unknown constant kind '{other}'; use inertialFluent, additiveFluent, exogenousAction, additiveAction, or attribute"
                ),
                pos,
            )),
        }
    }

    fn parse_query_block(&mut self, program: &mut Program) -> PResult<()> {
        let mut query = Query {
            pos: self.pos(),
            ..Query::default()
        };
        loop {
            if self.peek().is_none() {
                break; // trailing semicolon
            }
            let item_pos = self.pos();
            if self.peek_keyword("label") && self.peek2() == Some(&Tok::DoubleColon) {
                self.i += 2;
                match self.bump().map(|t| t.tok.clone()) {
                    Some(Tok::LIdent(s)) => query.label = Some(s),
                    Some(Tok::Int(n)) => query.label = Some(n.to_string()),
                    _ => {
                        return Err(Diagnostic::error("expected label name after 'label ::'", item_pos))
                    }
                }
            } else if self.peek_keyword("maxstep") && self.peek2() == Some(&Tok::DoubleColon) {
                self.i += 2;
                match self.bump().map(|t| t.tok.clone()) {
                    Some(Tok::Int(n)) => {
                        if query.maxstep.is_some() {
                            return Err(Diagnostic::error(
                                "duplicate 'maxstep ::' bound in query",
                                item_pos,
                            ));
                        }
                        query.maxstep = Some(n);
                    }
                    _ => {
                        return Err(Diagnostic::error(
                            "expected integer after 'maxstep ::'",
                            item_pos,
                        ))
                    }
                }
            } else {
                // timed formula: `<step>: formula` where step is an integer or `maxstep`
                let step = if self.peek_keyword("maxstep") {
                    self.i += 1;
                    StepIndex::Maxstep
                } else if let Some(Tok::Int(n)) = self.peek().cloned() {
                    self.i += 1;
                    if n < 0 {
                        return Err(Diagnostic::error("step indices must be >= 0", item_pos));
                    }
                    StepIndex::At(n)
                } else {
                    return Err(Diagnostic::error(
                        "expected query item: 'label ::', 'maxstep ::', or '<step>: formula'",
                        item_pos,
                    ));
                };
                self.expect(&Tok::Colon, "':' after step index")?;
                let fpos = self.pos();
                let formula = self.parse_formula()?;
                if step == StepIndex::Maxstep {
                    if let Formula::Atom(Term::Int(n)) = &formula {
                        return Err(Diagnostic::error(
                            format!(
                                "'maxstep: {n}' is not syntactically correct; a maximum step bound is written 'maxstep :: {n}'"
                            ),
                            fpos,
                        ));
                    }
                }
                query.timed.push(TimedFormula { step, formula, pos: fpos });
            }
            if !self.eat(&Tok::Semi) {
                break;
            }
        }
        program.queries.push(query);
        Ok(())
    }

    fn parse_law(&mut self) -> PResult<Law> {
        let pos = self.pos();
        let law = if self.eat_keyword("impossible") {
            CausalLaw::Impossible { body: self.parse_formula()? }
        } else if self.eat_keyword("nonexecutable") {
            let actions = self.parse_formula()?;
            let cond = if self.eat_keyword("if") {
                self.parse_formula()?
            } else {
                Formula::True
            };
            CausalLaw::Nonexecutable { actions, cond }
        } else if self.eat_keyword("default") {
            let atom = self.parse_formula()?;
            let cond = if self.eat_keyword("if") {
                self.parse_formula()?
            } else {
                Formula::True
            };
            let after = if self.eat_keyword("after") {
                Some(self.parse_formula()?)
            } else {
                None
            };
            CausalLaw::Default { atom, cond, after }
        } else if self.eat_keyword("always") {
            CausalLaw::Always { body: self.parse_formula()? }
        } else {
            let head = self.parse_formula()?;
            if self.eat_keyword("causes") {
                let effect = self.parse_formula()?;
                let cond = if self.eat_keyword("if") {
                    self.parse_formula()?
                } else {
                    Formula::True
                };
                CausalLaw::Causes { action: head, effect, cond }
            } else if self.eat_keyword("increments") {
                let (target, amount, cond) = self.parse_additive_tail()?;
                CausalLaw::Increments { action: head, target, amount, cond }
            } else if self.eat_keyword("decrements") {
                let (target, amount, cond) = self.parse_additive_tail()?;
                CausalLaw::Decrements { action: head, target, amount, cond }
            } else if self.eat_keyword("if") {
                let cond = self.parse_formula()?;
                let after = if self.eat_keyword("after") {
                    Some(self.parse_formula()?)
                } else {
                    None
                };
                CausalLaw::Conditional { head, cond, after }
            } else if self.eat_keyword("after") {
                let after = self.parse_formula()?;
                CausalLaw::Conditional { head, cond: Formula::True, after: Some(after) }
            } else {
                CausalLaw::Conditional { head, cond: Formula::True, after: None }
            }
        };
        Ok(Law { law, pos })
    }

    fn parse_additive_tail(&mut self) -> PResult<(Term, Term, Formula)> {
        let tpos = self.pos();
        let target = match self.parse_pexpr_cmp()? {
            PExpr::T(t @ (Term::Obj(_) | Term::App(..))) => t,
            _ => {
                return Err(Diagnostic::error(
                    "expected a constant after increments/decrements",
                    tpos,
                ))
            }
        };
        if !self.eat_keyword("by") {
            return Err(Diagnostic::error(
                "expected 'by' in increment/decrement law",
                self.pos(),
            ));
        }
        let apos = self.pos();
        let amount = match self.parse_pexpr_cmp()? {
            PExpr::T(t) => t,
            PExpr::F(_) => {
                return Err(Diagnostic::error("expected an integer term after 'by'", apos))
            }
        };
        let cond = if self.eat_keyword("if") {
            self.parse_formula()?
        } else {
            Formula::True
        };
        Ok((target, amount, cond))
    }

    fn parse_formula(&mut self) -> PResult<Formula> {
        let pos = self.pos();
        let e = self.parse_pexpr_implies()?;
        self.coerce_formula(e, pos)
    }

    fn coerce_formula(&self, e: PExpr, pos: Pos) -> PResult<Formula> {
        match e {
            PExpr::F(f) => Ok(f),
            PExpr::T(Term::BoolLit(b)) => Ok(if b { Formula::True } else { Formula::False }),
            PExpr::T(t @ (Term::Obj(_) | Term::App(..))) => Ok(Formula::Atom(t)),
            PExpr::T(t @ Term::Int(_)) => Ok(Formula::Atom(t)),
            PExpr::T(t) => Err(Diagnostic::error(
                format!("expected a formula, found arithmetic term {t}"),
                pos,
            )),
        }
    }

    fn coerce_term(&self, e: PExpr, pos: Pos) -> PResult<Term> {
        match e {
            PExpr::T(t) => Ok(t),
            PExpr::F(_) => Err(Diagnostic::error(
                "expected a term, found a formula",
                pos,
            )),
        }
    }

    fn parse_pexpr_implies(&mut self) -> PResult<PExpr> {
        let pos = self.pos();
        let lhs = self.parse_pexpr_or()?;
        if self.eat(&Tok::Arrow) {
            let l = self.coerce_formula(lhs, pos)?;
            let rpos = self.pos();
            let rhs = self.parse_pexpr_implies()?;
            let r = self.coerce_formula(rhs, rpos)?;
            Ok(PExpr::F(Formula::Implies(Box::new(l), Box::new(r))))
        } else {
            Ok(lhs)
        }
    }

    fn parse_pexpr_or(&mut self) -> PResult<PExpr> {
        let pos = self.pos();
        let mut lhs = self.parse_pexpr_and()?;
        while self.eat(&Tok::Pipe) {
            let l = self.coerce_formula(lhs, pos)?;
            let rpos = self.pos();
            let rhs = self.parse_pexpr_and()?;
            let r = self.coerce_formula(rhs, rpos)?;
            lhs = PExpr::F(Formula::Or(Box::new(l), Box::new(r)));
        }
        Ok(lhs)
    }

    fn parse_pexpr_and(&mut self) -> PResult<PExpr> {
        let pos = self.pos();
        let mut lhs = self.parse_pexpr_not()?;
        while self.eat(&Tok::Amp) {
            let l = self.coerce_formula(lhs, pos)?;
            if self.peek().is_none() {
                return Err(Diagnostic::error("unexpected end of law after '&'", self.pos()));
            }
            let rpos = self.pos();
            let rhs = self.parse_pexpr_not()?;
            let r = self.coerce_formula(rhs, rpos)?;
            lhs = PExpr::F(Formula::And(Box::new(l), Box::new(r)));
        }
        Ok(lhs)
    }

    fn parse_pexpr_not(&mut self) -> PResult<PExpr> {
        if self.eat(&Tok::Tilde) {
            let pos = self.pos();
            let inner = self.parse_pexpr_not()?;
            let f = self.coerce_formula(inner, pos)?;
            Ok(PExpr::F(Formula::Not(Box::new(f))))
        } else {
            self.parse_pexpr_cmp()
        }
    }

    fn parse_pexpr_cmp(&mut self) -> PResult<PExpr> {
        let lpos = self.pos();
        let lhs = self.parse_add()?;
        let op = match self.peek() {
            Some(Tok::Eq) => Some(CmpOp::Eq),
            Some(Tok::Neq) => Some(CmpOp::Neq),
            Some(Tok::Lt) => Some(CmpOp::Lt),
            Some(Tok::Gt) => Some(CmpOp::Gt),
            Some(Tok::Le) => Some(CmpOp::Le),
            Some(Tok::Ge) => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.i += 1;
            let l = self.coerce_term(lhs, lpos)?;
            let rpos = self.pos();
            let rhs = self.parse_add()?;
            let r = self.coerce_term(rhs, rpos)?;
            Ok(PExpr::F(Formula::Cmp(op, l, r)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_add(&mut self) -> PResult<PExpr> {
        let lpos = self.pos();
        let mut lhs = self.parse_mul()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => ArithOp::Add,
                Some(Tok::Minus) => ArithOp::Sub,
                _ => break,
            };
            self.i += 1;
            let l = self.coerce_term(lhs, lpos)?;
            let rpos = self.pos();
            let rhs = self.parse_mul()?;
            let r = self.coerce_term(rhs, rpos)?;
            lhs = PExpr::T(Term::Bin(op, Box::new(l), Box::new(r)));
        }
        Ok(lhs)
    }

    fn parse_mul(&mut self) -> PResult<PExpr> {
        let lpos = self.pos();
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => ArithOp::Mul,
                Some(Tok::SlashSlash) => ArithOp::FloorDiv,
                Some(Tok::LIdent(s)) if s == "mod" => ArithOp::Mod,
                _ => break,
            };
            self.i += 1;
            let l = self.coerce_term(lhs, lpos)?;
            let rpos = self.pos();
            let rhs = self.parse_unary()?;
            let r = self.coerce_term(rhs, rpos)?;
            lhs = PExpr::T(Term::Bin(op, Box::new(l), Box::new(r)));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<PExpr> {
        if self.eat(&Tok::Minus) {
            let pos = self.pos();
            let inner = self.parse_unary()?;
            let t = self.coerce_term(inner, pos)?;
            // fold negative integer literals so rendering round-trips
            if let Term::Int(n) = t {
                return Ok(PExpr::T(Term::Int(-n)));
            }
            Ok(PExpr::T(Term::Neg(Box::new(t))))
        } else {
            self.parse_primary()
        }
    }

    fn parse_primary(&mut self) -> PResult<PExpr> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.i += 1;
                Ok(PExpr::T(Term::Int(n)))
            }
            Some(Tok::UIdent(v)) => {
                self.i += 1;
                Ok(PExpr::T(Term::Var(v)))
            }
            Some(Tok::LIdent(s)) => match s.as_str() {
                "true" => {
                    self.i += 1;
                    Ok(PExpr::T(Term::BoolLit(true)))
                }
                "false" => {
                    self.i += 1;
                    Ok(PExpr::T(Term::BoolLit(false)))
                }
                "abs" => {
                    self.i += 1;
                    self.expect(&Tok::LParen, "'(' after abs")?;
                    let ipos = self.pos();
                    let inner = self.parse_add()?;
                    let t = self.coerce_term(inner, ipos)?;
                    self.expect(&Tok::RParen, "')' after abs argument")?;
                    Ok(PExpr::T(Term::Abs(Box::new(t))))
                }
                "if" | "after" | "causes" | "increments" | "decrements" | "by" | "impossible"
                | "nonexecutable" | "default" | "always" => Err(Diagnostic::error(
                    format!("unexpected keyword '{s}' (incomplete law?)"),
                    pos,
                )),
                _ => {
                    self.i += 1;
                    if self.eat(&Tok::LParen) {
                        let mut args = Vec::new();
                        loop {
                            let apos = self.pos();
                            let arg = self.parse_add()?;
                            args.push(self.coerce_term(arg, apos)?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(&Tok::RParen, "')' after arguments")?;
                        Ok(PExpr::T(Term::App(s, args)))
                    } else {
                        Ok(PExpr::T(Term::Obj(s)))
                    }
                }
            },
            Some(Tok::LParen) => {
                self.i += 1;
                let inner = self.parse_pexpr_implies()?;
                self.expect(&Tok::RParen, "closing ')'")?;
                Ok(inner)
            }
            Some(other) => Err(Diagnostic::error(
                format!("unexpected token {other:?} in formula"),
                pos,
            )),
            None => Err(Diagnostic::error("unexpected end of law", pos)),
        }
    }
}

fn declare_sort(program: &mut Program, name: &str, pos: Pos, supersorts: &[String]) {
    if let Some(existing) = program.sorts.iter_mut().find(|s| s.name == name) {
        for sup in supersorts {
            if !existing.supersorts.contains(sup) {
                existing.supersorts.push(sup.clone());
            }
        }
    } else {
        program.sorts.push(SortDecl {
            name: name.to_string(),
            supersorts: supersorts.to_vec(),
            pos,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(text: &str) -> Program {
        parse_program(&SourceProgram::anonymous(text)).expect("parse failed")
    }

    const LISTING1: &str = "\
:- sorts
   loc >> block.

:- objects
   b1, b2, b3, b4     :: block;
   table              :: loc.

:- constants
   loc(block)        :: inertialFluent(loc);
   move(block, loc)  :: exogenousAction.
";

    #[test]
    fn parses_blocks_world_signature() {
        let p = parse_ok(LISTING1);
        assert_eq!(p.sorts.len(), 2);
        let block = p.sort("block").unwrap();
        assert_eq!(block.supersorts, vec!["loc".to_string()]);
        assert_eq!(p.objects.len(), 5);
        assert_eq!(p.objects[0].sort, "block");
        assert_eq!(p.objects[4].sort, "loc");
        assert_eq!(p.constants.len(), 2);
        assert!(matches!(
            p.constant("loc").unwrap().kind,
            ConstantKind::InertialFluent(ValueSort::Sort(ref s)) if s == "loc"
        ));
        assert!(matches!(
            p.constant("move").unwrap().kind,
            ConstantKind::ExogenousAction
        ));
    }

    #[test]
    fn parses_causes_law_with_grouping() {
        // `a causes F if H` groups as causes(a, F, H)
        let p = parse_ok("move(B,L) causes loc(B)=L.");
        assert_eq!(p.laws.len(), 1);
        match &p.laws[0].law {
            CausalLaw::Causes { action, effect, cond } => {
                assert_eq!(
                    *action,
                    Formula::Atom(Term::app("move", vec![Term::var("B"), Term::var("L")]))
                );
                assert_eq!(
                    *effect,
                    Formula::eq(Term::app("loc", vec![Term::var("B")]), Term::var("L"))
                );
                assert_eq!(*cond, Formula::True);
            }
            other => panic!("expected causes law, got {other:?}"),
        }
    }

    #[test]
    fn parses_blocks_world_rules() {
        let p = parse_ok(
            "move(B,L) causes loc(B)=L.\n\
             nonexecutable move(B,L) if loc(B1)=B.\n\
             impossible loc(B1)=B & loc(B2)=B & B1\\=B2.",
        );
        assert_eq!(p.laws.len(), 3);
        assert!(matches!(p.laws[1].law, CausalLaw::Nonexecutable { .. }));
        assert!(matches!(p.laws[2].law, CausalLaw::Impossible { .. }));
    }

    #[test]
    fn truncated_law_yields_diagnostic() {
        let src = SourceProgram::anonymous("impossible loc(B1)=B &");
        let err = parse_program(&src).unwrap_err();
        assert!(err.iter().any(|d| d.message.contains("unexpected end")));
    }

    #[test]
    fn parsing_is_total_on_garbage() {
        let (_, diags) = parse_program_lenient(&SourceProgram::anonymous("@@@ ??? !!!"));
        assert!(!diags.is_empty());
    }

    #[test]
    fn partial_parse_keeps_good_statements() {
        let (p, diags) =
            parse_program_lenient(&SourceProgram::anonymous("p causes q.\nNONSENSE ] here.\nr causes s."));
        assert_eq!(p.laws.len(), 2);
        assert!(!diags.is_empty());
    }

    #[test]
    fn parses_increment_laws() {
        let p = parse_ok(
            "cross(V) decrements numOnBank(L, G) by N if numCrossing(V, G) = N & loc(V) = L.",
        );
        match &p.laws[0].law {
            CausalLaw::Decrements { target, amount, .. } => {
                assert_eq!(*target, Term::app("numOnBank", vec![Term::var("L"), Term::var("G")]));
                assert_eq!(*amount, Term::var("N"));
            }
            other => panic!("expected decrements, got {other:?}"),
        }
    }

    #[test]
    fn parses_query_block() {
        let p = parse_ok(
            ":- query\n\
             \x20   0: numOnBank(bank1, missionaries) = 3 & loc(boat) = bank1;\n\
             \x20   maxstep: numOnBank(bank2, missionaries) = 3.",
        );
        assert_eq!(p.queries.len(), 1);
        let q = &p.queries[0];
        assert_eq!(q.timed.len(), 2);
        assert_eq!(q.timed[0].step, StepIndex::At(0));
        assert_eq!(q.timed[1].step, StepIndex::Maxstep);
    }

    #[test]
    fn parses_query_with_label_and_bound() {
        let p = parse_ok(":- query label :: test_query; maxstep :: 11; 0: p.");
        let q = &p.queries[0];
        assert_eq!(q.label.as_deref(), Some("test_query"));
        assert_eq!(q.maxstep, Some(11));
        assert_eq!(q.timed.len(), 1);
    }

    #[test]
    fn minimal_query() {
        let p = parse_ok(":- query 0: p.");
        assert_eq!(p.queries[0].timed.len(), 1);
    }

    #[test]
    fn maxstep_in_formula_position_is_rejected() {
        let src = SourceProgram::anonymous(":- query 0: p; maxstep: 81.");
        let err = parse_program(&src).unwrap_err();
        assert!(
            err.iter().any(|d| d.message.contains("maxstep :: 81")),
            "diagnostic should name the correct form: {err:?}"
        );
    }

    #[test]
    fn attribute_declaration() {
        let p = parse_ok(
            ":- constants\n\
             \x20 cross(vessel) :: exogenousAction;\n\
             \x20 numCrossing(vessel, group) :: attribute(integer) of cross(vessel).",
        );
        match &p.constant("numCrossing").unwrap().kind {
            ConstantKind::Attribute { value, action, action_args } => {
                assert_eq!(*value, ValueSort::Sort("integer".to_string()));
                assert_eq!(action, "cross");
                assert_eq!(action_args, &vec!["vessel".to_string()]);
            }
            other => panic!("expected attribute, got {other:?}"),
        }
    }

    #[test]
    fn trailing_semicolon_in_section_is_accepted() {
        let p = parse_ok(":- constants numOnBank(location, group) :: additiveFluent(integer);.");
        assert_eq!(p.constants.len(), 1);
    }

    #[test]
    fn multiple_query_blocks_collect_in_order() {
        let p = parse_ok(":- query label :: a; 0: p. :- query label :: b; 0: q.");
        assert_eq!(p.queries.len(), 2);
        assert_eq!(p.queries[0].label.as_deref(), Some("a"));
        assert_eq!(p.queries[1].label.as_deref(), Some("b"));
    }

    #[test]
    fn precedence_binds_comparisons_tighter_than_connectives() {
        let p = parse_ok("p if N1 + N2 > 2 & q.");
        match &p.laws[0].law {
            CausalLaw::Conditional { cond, .. } => {
                match cond {
                    Formula::And(a, b) => {
                        assert!(matches!(**a, Formula::Cmp(CmpOp::Gt, ..)));
                        assert!(matches!(**b, Formula::Atom(_)));
                    }
                    other => panic!("expected conjunction, got {other:?}"),
                }
            }
            other => panic!("expected conditional law, got {other:?}"),
        }
    }

    #[test]
    fn parenthesized_disjunction_in_condition() {
        let p = parse_ok("nonexecutable go if (loc(city1) | loc(city2)) & ready.");
        assert!(matches!(p.laws[0].law, CausalLaw::Nonexecutable { .. }));
    }

    #[test]
    fn implication_in_always() {
        let p = parse_ok(
            "always (weight(passengers) = N1 & weight(truck) = N2) -> N1 + N2 < 10.",
        );
        match &p.laws[0].law {
            CausalLaw::Always { body } => assert!(matches!(body, Formula::Implies(..))),
            other => panic!("expected always, got {other:?}"),
        }
    }

    #[test]
    fn sort_list_with_shared_subsorts() {
        let p = parse_ok(":- sorts person >> missionary, cannibal; vessel.");
        assert_eq!(p.sort("missionary").unwrap().supersorts, vec!["person".to_string()]);
        assert_eq!(p.sort("cannibal").unwrap().supersorts, vec!["person".to_string()]);
        assert!(p.sort("vessel").unwrap().supersorts.is_empty());
    }

    #[test]
    fn empty_input_is_an_empty_program() {
        let p = parse_ok("");
        assert!(p.laws.is_empty() && p.sorts.is_empty() && p.queries.is_empty());
    }

    #[test]
    fn negative_literals_fold() {
        let p = parse_ok("p if N = -3.");
        match &p.laws[0].law {
            CausalLaw::Conditional { cond, .. } => {
                assert_eq!(*cond, Formula::Cmp(CmpOp::Eq, Term::var("N"), Term::Int(-3)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn bare_static_law() {
        let p = parse_ok("boatLocation = bank1.");
        assert!(matches!(
            p.laws[0].law,
            CausalLaw::Conditional { ref cond, ref after, .. }
                if *cond == Formula::True && after.is_none()
        ));
    }

    #[test]
    fn default_law_variants() {
        let p = parse_ok(
            "default val(R, C) = none.\n\
             default powerOn if switchTurned.\n\
             default ferry(right) if hasGas after ferry(left).",
        );
        assert_eq!(p.laws.len(), 3);
        assert!(matches!(p.laws[0].law, CausalLaw::Default { ref after, .. } if after.is_none()));
        assert!(matches!(p.laws[2].law, CausalLaw::Default { ref after, .. } if after.is_some()));
    }
}

//! Data model for BC+ programs: declarations, terms, formulas, causal laws,
//! and queries, plus sort-hierarchy resolution and ground formula evaluation.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Source position, 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Arithmetic operators usable inside terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    FloorDiv,
    Mod,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::FloorDiv => "//",
            ArithOp::Mod => "mod",
        }
    }
}

/// Comparison operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Neq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Neq => "\\=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds_int(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Neq => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Terms: objects, integers, schematic variables, applications (constants or
/// constructor objects), and integer arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    /// Lower-case identifier: an object, a 0-ary constant, or a sort name
    /// depending on context.
    Obj(String),
    Int(i64),
    /// Upper-case identifier.
    Var(String),
    App(String, Vec<Term>),
    BoolLit(bool),
    Neg(Box<Term>),
    Abs(Box<Term>),
    Bin(ArithOp, Box<Term>, Box<Term>),
}

impl Term {
    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.to_string(), args)
    }

    pub fn obj(name: &str) -> Term {
        Term::Obj(name.to_string())
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    /// Collects variable names in first-occurrence order.
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
            Term::Neg(t) | Term::Abs(t) => t.collect_vars(out),
            Term::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            _ => {}
        }
    }

    /// Substitutes variables by values.
    pub fn substitute(&self, env: &BTreeMap<String, Value>) -> Term {
        match self {
            Term::Var(v) => match env.get(v) {
                Some(val) => val.to_term(),
                None => self.clone(),
            },
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(env)).collect())
            }
            Term::Neg(t) => Term::Neg(Box::new(t.substitute(env))),
            Term::Abs(t) => Term::Abs(Box::new(t.substitute(env))),
            Term::Bin(op, a, b) => Term::Bin(
                *op,
                Box::new(a.substitute(env)),
                Box::new(b.substitute(env)),
            ),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Obj(s) => write!(f, "{s}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Term::BoolLit(b) => write!(f, "{b}"),
            Term::Neg(t) => write!(f, "-{t}"),
            Term::Abs(t) => write!(f, "abs({t})"),
            Term::Bin(op, a, b) => {
                let wrap = |t: &Term, f: &mut fmt::Formatter<'_>| -> fmt::Result {
                    match t {
                        Term::Bin(..) => write!(f, "({t})"),
                        _ => write!(f, "{t}"),
                    }
                };
                wrap(a, f)?;
                write!(f, " {} ", op.symbol())?;
                wrap(b, f)
            }
        }
    }
}

/// Formulas over atoms with the classical connectives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    /// Comparison between two terms; `c = v` atoms are a special case.
    Cmp(CmpOp, Term, Term),
    /// Bare boolean constant application `c` or `c(args)`.
    Atom(Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, b) => b,
            (a, Formula::True) => a,
            (a, b) => Formula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Eq, a, b)
    }

    /// Flattens nested conjunctions into a list.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Formula::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Atom(t) => t.collect_vars(out),
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            _ => {}
        }
    }

    pub fn substitute(&self, env: &BTreeMap<String, Value>) -> Formula {
        match self {
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, a.substitute(env), b.substitute(env)),
            Formula::Atom(t) => Formula::Atom(t.substitute(env)),
            Formula::Not(f) => Formula::Not(Box::new(f.substitute(env))),
            Formula::And(a, b) => {
                Formula::And(Box::new(a.substitute(env)), Box::new(b.substitute(env)))
            }
            Formula::Or(a, b) => {
                Formula::Or(Box::new(a.substitute(env)), Box::new(b.substitute(env)))
            }
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.substitute(env)), Box::new(b.substitute(env)))
            }
            other => other.clone(),
        }
    }

    /// Visits every term in the formula.
    pub fn visit_terms<'a>(&'a self, visit: &mut dyn FnMut(&'a Term)) {
        match self {
            Formula::Cmp(_, a, b) => {
                visit(a);
                visit(b);
            }
            Formula::Atom(t) => visit(t),
            Formula::Not(f) => f.visit_terms(visit),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_terms(visit);
                b.visit_terms(visit);
            }
            _ => {}
        }
    }
}

fn fmt_formula(f: &Formula, out: &mut String, parent_prec: u8) {
    // precedence: implication 1, or 2, and 3, not 4, atoms 5
    let prec = match f {
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(..) => 4,
        _ => 5,
    };
    let need_paren = prec < parent_prec;
    if need_paren {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Cmp(op, a, b) => {
            out.push_str(&format!("{a} {} {b}", op.symbol()));
        }
        Formula::Atom(t) => out.push_str(&t.to_string()),
        Formula::Not(inner) => {
            out.push('~');
            fmt_formula(inner, out, 5);
        }
        Formula::And(a, b) => {
            // left-associative: right-nested conjunctions need parentheses
            fmt_formula(a, out, 3);
            out.push_str(" & ");
            fmt_formula(b, out, 4);
        }
        Formula::Or(a, b) => {
            fmt_formula(a, out, 2);
            out.push_str(" | ");
            fmt_formula(b, out, 3);
        }
        Formula::Implies(a, b) => {
            // right-associative
            fmt_formula(a, out, 2);
            out.push_str(" -> ");
            fmt_formula(b, out, 1);
        }
    }
    if need_paren {
        out.push(')');
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        fmt_formula(self, &mut s, 0);
        write!(f, "{s}")
    }
}

/// Ground values: what objects and constants evaluate to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Sym(String),
    Ctor(String, Vec<Value>),
    /// Rest value taken by an attribute when its parent action does not occur.
    NoneVal,
}

impl Value {
    pub fn sym(s: &str) -> Value {
        Value::Sym(s.to_string())
    }

    pub fn to_term(&self) -> Term {
        match self {
            Value::Bool(b) => Term::BoolLit(*b),
            Value::Int(n) => Term::Int(*n),
            Value::Sym(s) => Term::Obj(s.clone()),
            Value::Ctor(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.to_term()).collect())
            }
            Value::NoneVal => Term::Obj("none".to_string()),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Ctor(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Value::NoneVal => write!(f, "none"),
        }
    }
}

/// Key identifying a ground constant instance, e.g. `numOnBank(bank1, missionaries)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtomKey {
    pub constant: String,
    pub args: Vec<Value>,
}

impl GroundAtomKey {
    pub fn new(constant: &str, args: Vec<Value>) -> Self {
        GroundAtomKey {
            constant: constant.to_string(),
            args,
        }
    }
}

impl fmt::Display for GroundAtomKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.constant)
        } else {
            write!(f, "{}(", self.constant)?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")
        }
    }
}

/// `s >> s2` edges give `s2` the supersort `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDecl {
    pub name: String,
    pub supersorts: Vec<String>,
    pub pos: Pos,
}

/// One declared object (or range, or constructor scheme) of a sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectSpec {
    Name(String),
    Int(i64),
    Range(i64, i64),
    /// `o(int, int)`: constructor whose arguments range over sorts.
    Ctor(String, Vec<String>),
}

impl fmt::Display for ObjectSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectSpec::Name(s) => write!(f, "{s}"),
            ObjectSpec::Int(n) => write!(f, "{n}"),
            ObjectSpec::Range(a, b) => write!(f, "{a}..{b}"),
            ObjectSpec::Ctor(name, args) => write!(f, "{name}({})", args.join(", ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectDecl {
    pub spec: ObjectSpec,
    pub sort: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub sort: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueSort {
    Boolean,
    Sort(String),
}

impl fmt::Display for ValueSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueSort::Boolean => write!(f, "boolean"),
            ValueSort::Sort(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstantKind {
    InertialFluent(ValueSort),
    AdditiveFluent(ValueSort),
    ExogenousAction,
    Attribute {
        value: ValueSort,
        action: String,
        action_args: Vec<String>,
    },
    AdditiveAction(ValueSort),
}

impl ConstantKind {
    pub fn is_fluent(&self) -> bool {
        matches!(
            self,
            ConstantKind::InertialFluent(_) | ConstantKind::AdditiveFluent(_)
        )
    }

    pub fn is_action(&self) -> bool {
        !self.is_fluent()
    }

    pub fn is_additive(&self) -> bool {
        matches!(
            self,
            ConstantKind::AdditiveFluent(_) | ConstantKind::AdditiveAction(_)
        )
    }

    pub fn value_sort(&self) -> ValueSort {
        match self {
            ConstantKind::InertialFluent(v)
            | ConstantKind::AdditiveFluent(v)
            | ConstantKind::AdditiveAction(v)
            | ConstantKind::Attribute { value: v, .. } => v.clone(),
            ConstantKind::ExogenousAction => ValueSort::Boolean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantDecl {
    pub name: String,
    pub arg_sorts: Vec<String>,
    pub kind: ConstantKind,
    pub pos: Pos,
}

/// Causal laws as they appear in the source: shorthand forms are preserved so
/// rendering round-trips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CausalLaw {
    /// `F if G [after H]` and bare `F.`; whether this is a static or action
    /// dynamic law is determined during normalization.
    Conditional {
        head: Formula,
        cond: Formula,
        after: Option<Formula>,
    },
    Causes {
        action: Formula,
        effect: Formula,
        cond: Formula,
    },
    Impossible {
        body: Formula,
    },
    Nonexecutable {
        actions: Formula,
        cond: Formula,
    },
    Default {
        atom: Formula,
        cond: Formula,
        after: Option<Formula>,
    },
    Always {
        body: Formula,
    },
    Increments {
        action: Formula,
        target: Term,
        amount: Term,
        cond: Formula,
    },
    Decrements {
        action: Formula,
        target: Term,
        amount: Term,
        cond: Formula,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Law {
    pub law: CausalLaw,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepIndex {
    At(i64),
    Maxstep,
}

impl fmt::Display for StepIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepIndex::At(n) => write!(f, "{n}"),
            StepIndex::Maxstep => write!(f, "maxstep"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedFormula {
    pub step: StepIndex,
    pub formula: Formula,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Query {
    pub label: Option<String>,
    pub maxstep: Option<i64>,
    pub timed: Vec<TimedFormula>,
    pub pos: Pos,
}

impl Default for Pos {
    fn default() -> Self {
        Pos { line: 1, col: 1 }
    }
}

/// A parsed BC+ program: declarations plus laws plus queries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub sorts: Vec<SortDecl>,
    pub objects: Vec<ObjectDecl>,
    pub variables: Vec<VariableDecl>,
    pub constants: Vec<ConstantDecl>,
    pub laws: Vec<Law>,
    pub queries: Vec<Query>,
}

impl Program {
    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts.iter().find(|s| s.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<&ConstantDecl> {
        self.constants.iter().find(|c| c.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Set of every integer declared as an object, across all sorts.
    pub fn integer_universe(&self) -> std::collections::BTreeSet<i64> {
        let mut out = std::collections::BTreeSet::new();
        for o in &self.objects {
            match &o.spec {
                ObjectSpec::Int(n) => {
                    out.insert(*n);
                }
                ObjectSpec::Range(a, b) => {
                    for n in *a..=*b {
                        out.insert(n);
                    }
                }
                _ => {}
            }
        }
        out
    }
}

/// Copy of the program with every source position reset, for structural
/// comparison (the parser records positions; rendering does not preserve them).
pub fn strip_positions(p: &Program) -> Program {
    let mut q = p.clone();
    for s in &mut q.sorts {
        s.pos = Pos::default();
    }
    for o in &mut q.objects {
        o.pos = Pos::default();
    }
    for v in &mut q.variables {
        v.pos = Pos::default();
    }
    for c in &mut q.constants {
        c.pos = Pos::default();
    }
    for l in &mut q.laws {
        l.pos = Pos::default();
    }
    for query in &mut q.queries {
        query.pos = Pos::default();
        for t in &mut query.timed {
            t.pos = Pos::default();
        }
    }
    q
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SortError {
    #[error("unknown sort: {0}")]
    UnknownSort(String),
    #[error("cyclic sort hierarchy involving {0}")]
    CyclicSortHierarchy(String),
}

/// Computes the ordered domain of a sort: direct objects in declaration order,
/// then objects of each subsort, subsorts taken in declaration order. Ranges
/// expand to individual integers; constructor objects expand by the Cartesian
/// product of their argument domains in row-major order.
pub fn sort_domain(
    sorts: &[SortDecl],
    objects: &[ObjectDecl],
    sort: &str,
) -> Result<Vec<Value>, SortError> {
    if sort == "boolean" {
        return Ok(vec![Value::Bool(false), Value::Bool(true)]);
    }
    check_acyclic(sorts)?;
    if !sorts.iter().any(|s| s.name == sort) {
        return Err(SortError::UnknownSort(sort.to_string()));
    }
    let mut out = Vec::new();
    let mut stack = Vec::new();
    collect_domain(sorts, objects, sort, &mut out, &mut stack)?;
    Ok(out)
}

fn check_acyclic(sorts: &[SortDecl]) -> Result<(), SortError> {
    // walk supersort edges from each sort; a sort reachable from itself is a cycle
    for s in sorts {
        let mut seen = vec![s.name.clone()];
        let mut frontier = s.supersorts.clone();
        while let Some(next) = frontier.pop() {
            if next == s.name {
                return Err(SortError::CyclicSortHierarchy(s.name.clone()));
            }
            if seen.contains(&next) {
                continue;
            }
            seen.push(next.clone());
            if let Some(decl) = sorts.iter().find(|d| d.name == next) {
                frontier.extend(decl.supersorts.iter().cloned());
            }
        }
    }
    Ok(())
}

fn collect_domain(
    sorts: &[SortDecl],
    objects: &[ObjectDecl],
    sort: &str,
    out: &mut Vec<Value>,
    expanding: &mut Vec<String>,
) -> Result<(), SortError> {
    if expanding.iter().any(|s| s == sort) {
        return Err(SortError::CyclicSortHierarchy(sort.to_string()));
    }
    expanding.push(sort.to_string());
    for obj in objects.iter().filter(|o| o.sort == sort) {
        match &obj.spec {
            ObjectSpec::Name(n) => push_unique(out, Value::Sym(n.clone())),
            ObjectSpec::Int(n) => push_unique(out, Value::Int(*n)),
            ObjectSpec::Range(a, b) => {
                for n in *a..=*b {
                    push_unique(out, Value::Int(n));
                }
            }
            ObjectSpec::Ctor(name, arg_sorts) => {
                let mut arg_domains = Vec::new();
                for s in arg_sorts {
                    let mut dom = Vec::new();
                    if s == "boolean" {
                        dom = vec![Value::Bool(false), Value::Bool(true)];
                    } else {
                        if !sorts.iter().any(|d| d.name == s.as_str()) {
                            return Err(SortError::UnknownSort(s.clone()));
                        }
                        collect_domain(sorts, objects, s, &mut dom, expanding)?;
                    }
                    arg_domains.push(dom);
                }
                for combo in cartesian(&arg_domains) {
                    push_unique(out, Value::Ctor(name.clone(), combo));
                }
            }
        }
    }
    // subsorts: sorts that name this one as a supersort, in declaration order
    let subsorts: Vec<&SortDecl> = sorts
        .iter()
        .filter(|d| d.supersorts.iter().any(|s| s == sort))
        .collect();
    for sub in subsorts {
        collect_domain(sorts, objects, &sub.name, out, expanding)?;
    }
    expanding.pop();
    Ok(())
}

fn push_unique(out: &mut Vec<Value>, v: Value) {
    if !out.contains(&v) {
        out.push(v);
    }
}

/// Row-major Cartesian product.
pub fn cartesian(domains: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for dom in domains {
        let mut next = Vec::with_capacity(out.len() * dom.len());
        for prefix in &out {
            for v in dom {
                let mut row = prefix.clone();
                row.push(v.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("constant {0} is not assigned in the valuation")]
    UnassignedConstant(String),
    #[error("arithmetic over non-integer operand: {0}")]
    NonIntegerArithmetic(String),
    #[error("formula is not ground: variable {0}")]
    NotGround(String),
}

/// A valuation maps ground constant instances to values.
pub type Valuation = BTreeMap<GroundAtomKey, Value>;

fn eval_term(term: &Term, val: &Valuation) -> Result<Value, EvalError> {
    match term {
        Term::Obj(name) => {
            let key = GroundAtomKey::new(name, vec![]);
            if let Some(v) = val.get(&key) {
                Ok(v.clone())
            } else {
                Ok(Value::Sym(name.clone()))
            }
        }
        Term::Int(n) => Ok(Value::Int(*n)),
        Term::Var(v) => Err(EvalError::NotGround(v.clone())),
        Term::BoolLit(b) => Ok(Value::Bool(*b)),
        Term::App(name, args) => {
            let mut arg_vals = Vec::with_capacity(args.len());
            for a in args {
                arg_vals.push(eval_term(a, val)?);
            }
            let key = GroundAtomKey::new(name, arg_vals.clone());
            if let Some(v) = val.get(&key) {
                Ok(v.clone())
            } else {
                Ok(Value::Ctor(name.clone(), arg_vals))
            }
        }
        Term::Neg(t) => {
            let v = eval_term(t, val)?;
            match v.as_int() {
                Some(n) => Ok(Value::Int(-n)),
                None => Err(EvalError::NonIntegerArithmetic(t.to_string())),
            }
        }
        Term::Abs(t) => {
            let v = eval_term(t, val)?;
            match v.as_int() {
                Some(n) => Ok(Value::Int(n.abs())),
                None => Err(EvalError::NonIntegerArithmetic(t.to_string())),
            }
        }
        Term::Bin(op, a, b) => {
            let va = eval_term(a, val)?;
            let vb = eval_term(b, val)?;
            let (Some(x), Some(y)) = (va.as_int(), vb.as_int()) else {
                return Err(EvalError::NonIntegerArithmetic(term.to_string()));
            };
            let r = match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
                ArithOp::Mul => x.checked_mul(y),
                ArithOp::FloorDiv => {
                    if y == 0 {
                        None
                    } else {
                        Some(x.div_euclid(y))
                    }
                }
                ArithOp::Mod => {
                    if y == 0 {
                        None
                    } else {
                        Some(x.rem_euclid(y))
                    }
                }
            };
            match r {
                Some(n) => Ok(Value::Int(n)),
                None => Err(EvalError::NonIntegerArithmetic(term.to_string())),
            }
        }
    }
}

/// Classical evaluation of a ground formula under a valuation. A term `c` or
/// `c(args)` present in the valuation reads as that constant's value;
/// otherwise it denotes itself as an object.
pub fn eval_formula(formula: &Formula, val: &Valuation) -> Result<bool, EvalError> {
    match formula {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Atom(t) => {
            let v = eval_term(t, val)?;
            match v {
                Value::Bool(b) => Ok(b),
                other => Err(EvalError::UnassignedConstant(format!(
                    "{t} (evaluates to non-boolean {other})"
                ))),
            }
        }
        Formula::Cmp(op, a, b) => {
            let va = eval_term(a, val)?;
            let vb = eval_term(b, val)?;
            match op {
                CmpOp::Eq => Ok(va == vb),
                CmpOp::Neq => Ok(va != vb),
                _ => match (va.as_int(), vb.as_int()) {
                    (Some(x), Some(y)) => Ok(op.holds_int(x, y)),
                    _ => Err(EvalError::NonIntegerArithmetic(format!(
                        "{a} {} {b}",
                        op.symbol()
                    ))),
                },
            }
        }
        Formula::Not(f) => Ok(!eval_formula(f, val)?),
        Formula::And(a, b) => Ok(eval_formula(a, val)? && eval_formula(b, val)?),
        Formula::Or(a, b) => Ok(eval_formula(a, val)? || eval_formula(b, val)?),
        Formula::Implies(a, b) => Ok(!eval_formula(a, val)? || eval_formula(b, val)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decl_sorts(names: &[(&str, &[&str])]) -> Vec<SortDecl> {
        names
            .iter()
            .map(|(n, sup)| SortDecl {
                name: n.to_string(),
                supersorts: sup.iter().map(|s| s.to_string()).collect(),
                pos: Pos::default(),
            })
            .collect()
    }

    fn obj(name: &str, sort: &str) -> ObjectDecl {
        ObjectDecl {
            spec: ObjectSpec::Name(name.to_string()),
            sort: sort.to_string(),
            pos: Pos::default(),
        }
    }

    #[test]
    fn supersort_domain_has_five_members() {
        let sorts = decl_sorts(&[("package", &[]), ("box", &["package"])]);
        let objects = vec![
            obj("p1", "package"),
            obj("p2", "package"),
            obj("b1", "box"),
            obj("b2", "box"),
            obj("b3", "box"),
        ];
        let dom = sort_domain(&sorts, &objects, "package").unwrap();
        assert_eq!(
            dom,
            vec![
                Value::sym("p1"),
                Value::sym("p2"),
                Value::sym("b1"),
                Value::sym("b2"),
                Value::sym("b3")
            ]
        );
        let dom_box = sort_domain(&sorts, &objects, "box").unwrap();
        assert_eq!(dom_box.len(), 3);
    }

    #[test]
    fn empty_sort_has_empty_domain() {
        let sorts = decl_sorts(&[("thing", &[])]);
        assert_eq!(sort_domain(&sorts, &[], "thing").unwrap(), vec![]);
    }

    #[test]
    fn unknown_sort_is_an_error() {
        let sorts = decl_sorts(&[("thing", &[])]);
        assert_eq!(
            sort_domain(&sorts, &[], "nothing"),
            Err(SortError::UnknownSort("nothing".to_string()))
        );
    }

    #[test]
    fn cyclic_hierarchy_is_an_error() {
        let sorts = decl_sorts(&[("a", &["b"]), ("b", &["a"])]);
        assert!(matches!(
            sort_domain(&sorts, &[], "a"),
            Err(SortError::CyclicSortHierarchy(_))
        ));
    }

    #[test]
    fn range_and_ctor_expansion() {
        let sorts = decl_sorts(&[("int", &[]), ("box", &[])]);
        let objects = vec![
            ObjectDecl {
                spec: ObjectSpec::Range(1, 3),
                sort: "int".to_string(),
                pos: Pos::default(),
            },
            ObjectDecl {
                spec: ObjectSpec::Ctor("o".to_string(), vec!["int".to_string(), "int".to_string()]),
                sort: "box".to_string(),
                pos: Pos::default(),
            },
        ];
        let ints = sort_domain(&sorts, &objects, "int").unwrap();
        assert_eq!(ints, vec![Value::Int(1), Value::Int(2), Value::Int(3)]);
        let boxes = sort_domain(&sorts, &objects, "box").unwrap();
        assert_eq!(boxes.len(), 9);
        assert_eq!(
            boxes[0],
            Value::Ctor("o".to_string(), vec![Value::Int(1), Value::Int(1)])
        );
        assert_eq!(
            boxes[1],
            Value::Ctor("o".to_string(), vec![Value::Int(1), Value::Int(2)])
        );
        assert_eq!(
            boxes[8],
            Value::Ctor("o".to_string(), vec![Value::Int(3), Value::Int(3)])
        );
    }

    #[test]
    fn subsort_domain_is_subset_of_supersort() {
        let sorts = decl_sorts(&[("loc", &[]), ("block", &["loc"])]);
        let objects = vec![
            obj("table", "loc"),
            obj("b1", "block"),
            obj("b2", "block"),
        ];
        let sup = sort_domain(&sorts, &objects, "loc").unwrap();
        let sub = sort_domain(&sorts, &objects, "block").unwrap();
        for v in &sub {
            assert!(sup.contains(v));
        }
    }

    #[test]
    fn eval_direct_lookup() {
        let mut val = Valuation::new();
        val.insert(
            GroundAtomKey::new("loc", vec![Value::sym("b1")]),
            Value::sym("table"),
        );
        let f = Formula::eq(
            Term::app("loc", vec![Term::obj("b1")]),
            Term::obj("table"),
        );
        assert!(eval_formula(&f, &val).unwrap());
    }

    #[test]
    fn eval_arithmetic_comparison() {
        let val = Valuation::new();
        // 2 + 1 > 2
        let f = Formula::Cmp(
            CmpOp::Gt,
            Term::Bin(ArithOp::Add, Box::new(Term::Int(2)), Box::new(Term::Int(1))),
            Term::Int(2),
        );
        assert!(eval_formula(&f, &val).unwrap());
    }

    #[test]
    fn eval_abs_mod() {
        // abs(-3) mod 2 = 1; oracle: |-3| = 3, 3 mod 2 = 1
        let val = Valuation::new();
        let f = Formula::eq(
            Term::Bin(
                ArithOp::Mod,
                Box::new(Term::Abs(Box::new(Term::Neg(Box::new(Term::Int(3)))))),
                Box::new(Term::Int(2)),
            ),
            Term::Int(1),
        );
        assert!(eval_formula(&f, &val).unwrap());
    }

    #[test]
    fn eval_unassigned_boolean_atom_errors() {
        let val = Valuation::new();
        let f = Formula::Atom(Term::app("p", vec![]));
        assert!(eval_formula(&f, &val).is_err());
    }

    #[test]
    fn de_morgan_duals_agree() {
        // eval(~(A & B)) == eval(~A | ~B) over all valuations of two booleans
        let a = Formula::Atom(Term::obj("a"));
        let b = Formula::Atom(Term::obj("b"));
        for va in [false, true] {
            for vb in [false, true] {
                let mut val = Valuation::new();
                val.insert(GroundAtomKey::new("a", vec![]), Value::Bool(va));
                val.insert(GroundAtomKey::new("b", vec![]), Value::Bool(vb));
                let lhs = Formula::not(Formula::and(a.clone(), b.clone()));
                let rhs = Formula::or(Formula::not(a.clone()), Formula::not(b.clone()));
                assert_eq!(
                    eval_formula(&lhs, &val).unwrap(),
                    eval_formula(&rhs, &val).unwrap()
                );
            }
        }
    }

    #[test]
    fn integer_universe_collects_ranges() {
        let mut p = Program::default();
        p.objects.push(ObjectDecl {
            spec: ObjectSpec::Range(0, 3),
            sort: "integer".to_string(),
            pos: Pos::default(),
        });
        p.objects.push(ObjectDecl {
            spec: ObjectSpec::Int(7),
            sort: "integer".to_string(),
            pos: Pos::default(),
        });
        let u = p.integer_universe();
        assert!(u.contains(&0) && u.contains(&3) && u.contains(&7) && !u.contains(&4));
    }
}

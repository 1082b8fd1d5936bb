//! Ground disjunctive programs: data model, parsing, printing, and the
//! answer-set semantics primitives (reduct, satisfaction, provability under a
//! level mapping).
//!
//! The text format is a minimal ground fragment: `a | b :- c, not d.`,
//! facts `a.`, constraints `:- a, not b.`, choice statements `{a}.`, and `%`
//! line comments. Choice statements are lowered at parse time to a disjunction
//! with a fresh copy atom, `a | __c_a.`, so everything downstream sees plain
//! disjunctive rules.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::bitset::BitSet;
use crate::graphs::SccInfo;

pub type AtomId = u32;

/// An interpretation is a set of atom ids.
pub type Interpretation = BitSet;

/// One ground rule. The three parts are sorted, deduplicated atom id lists.
/// Atoms may repeat across head and positive body; the parser rejects overlap
/// between positive and negative body as degenerate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Vec<AtomId>,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
}

impl Rule {
    pub fn new(mut head: Vec<AtomId>, mut pos: Vec<AtomId>, mut neg: Vec<AtomId>) -> Rule {
        for part in [&mut head, &mut pos, &mut neg] {
            part.sort_unstable();
            part.dedup();
        }
        Rule { head, pos, neg }
    }

    /// All atoms mentioned by the rule.
    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.head
            .iter()
            .chain(self.pos.iter())
            .chain(self.neg.iter())
            .copied()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }
}

/// A ground program: an interned atom table plus a list of rules.
#[derive(Clone, Debug, Default)]
pub struct Program {
    names: Vec<String>,
    index: HashMap<String, AtomId>,
    rules: Vec<Rule>,
    /// Atoms synthesized by choice-statement lowering, by id.
    choice_copies: BitSet,
}

/// Classification flags per the standard program classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub is_tight: bool,
    pub is_normal: bool,
    pub is_hcf: bool,
}

/// A partial map from atoms to derivation levels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelMap {
    map: HashMap<AtomId, u32>,
}

impl LevelMap {
    pub fn new() -> Self {
        LevelMap::default()
    }

    pub fn get(&self, a: AtomId) -> Option<u32> {
        self.map.get(&a).copied()
    }

    pub fn set(&mut self, a: AtomId, level: u32) {
        self.map.insert(a, level);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, u32)> + '_ {
        self.map.iter().map(|(&a, &l)| (a, l))
    }
}

impl FromIterator<(AtomId, u32)> for LevelMap {
    fn from_iter<I: IntoIterator<Item = (AtomId, u32)>>(iter: I) -> Self {
        LevelMap {
            map: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, thiserror::Error)]
pub enum SemanticsError {
    #[error("program is not head-cycle-free: atoms '{0}' and '{1}' share a head and a cycle")]
    NotHcf(String, String),
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn n_atoms(&self) -> usize {
        self.names.len()
    }

    pub fn atom_name(&self, a: AtomId) -> &str {
        &self.names[a as usize]
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.index.get(name).copied()
    }

    pub fn atom_ids(&self) -> impl Iterator<Item = AtomId> {
        0..self.names.len() as AtomId
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// True for atoms synthesized as the second disjunct of a lowered choice.
    pub fn is_choice_copy(&self, a: AtomId) -> bool {
        self.choice_copies.contains(a as usize)
    }

    /// Interns `name`, assigning the next id on first sight.
    pub fn intern(&mut self, name: &str) -> AtomId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as AtomId;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn push_rule(&mut self, rule: Rule) {
        self.rules.push(rule);
    }

    /// Removes and returns the most recently pushed rule.
    pub fn pop_rule(&mut self) -> Option<Rule> {
        self.rules.pop()
    }

    pub fn mark_choice_copy(&mut self, a: AtomId) {
        self.choice_copies.insert(a as usize);
    }

    /// Parses program text, numbering atoms in first-occurrence order.
    pub fn parse(text: &str) -> Result<Program, ParseError> {
        Parser::new(text).run()
    }

    /// The interpretation holding the named atoms; unknown names are an error.
    pub fn interpretation<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Interpretation {
        names
            .into_iter()
            .map(|n| {
                self.atom_id(n)
                    .unwrap_or_else(|| panic!("unknown atom '{n}'")) as usize
            })
            .collect()
    }

    /// Renders an interpretation as `{a,b,c}` with lexicographically sorted names.
    pub fn format_interpretation(&self, i: &Interpretation) -> String {
        let mut names: Vec<&str> = i.iter().map(|a| self.atom_name(a as AtomId)).collect();
        names.sort_unstable();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            let head = r
                .head
                .iter()
                .map(|&a| self.atom_name(a))
                .collect::<Vec<_>>()
                .join(" | ");
            let body = r
                .pos
                .iter()
                .map(|&a| self.atom_name(a).to_string())
                .chain(r.neg.iter().map(|&a| format!("not {}", self.atom_name(a))))
                .collect::<Vec<_>>()
                .join(", ");
            match (head.is_empty(), body.is_empty()) {
                (false, true) => writeln!(f, "{head}.")?,
                (false, false) => writeln!(f, "{head} :- {body}.")?,
                (true, false) => writeln!(f, ":- {body}.")?,
                (true, true) => unreachable!("parser rejects empty statements"),
            }
        }
        Ok(())
    }
}

/// Name of the copy atom introduced when lowering a choice over `name`.
pub fn choice_copy_name(name: &str) -> String {
    format!("__c_{name}")
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
    program: Program,
    seen: HashSet<Rule>,
}

#[derive(Debug, PartialEq)]
enum Tok {
    Ident(String),
    Pipe,
    Comma,
    Dot,
    ColonDash,
    LBrace,
    RBrace,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
            program: Program::new(),
            seen: HashSet::new(),
        }
    }

    fn err<T>(&self, line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Returns the next token with its start position, or None at end of input.
    fn next_tok(&mut self) -> Result<Option<(Tok, usize, usize)>, ParseError> {
        loop {
            match self.chars.peek() {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let c = self.bump().unwrap();
        let tok = match c {
            '|' => Tok::Pipe,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ':' => match self.chars.peek() {
                Some('-') => {
                    self.bump();
                    Tok::ColonDash
                }
                _ => return self.err(line, col, "expected '-' after ':'"),
            },
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                s.push(c);
                while let Some(&n) = self.chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        s.push(n);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            c => return self.err(line, col, format!("unexpected character '{c}'")),
        };
        Ok(Some((tok, line, col)))
    }

    fn expect_ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        match self.next_tok()? {
            Some((Tok::Ident(s), line, col)) => {
                if s == "not" {
                    self.err(line, col, "'not' is reserved and cannot name an atom")
                } else {
                    Ok((s, line, col))
                }
            }
            Some((_, line, col)) => self.err(line, col, "expected an atom name"),
            None => self.err(self.line, self.col, "unexpected end of input"),
        }
    }

    fn run(mut self) -> Result<Program, ParseError> {
        while let Some((tok, line, col)) = self.next_tok()? {
            match tok {
                Tok::LBrace => {
                    let (name, _, _) = self.expect_ident()?;
                    match self.next_tok()? {
                        Some((Tok::RBrace, _, _)) => {}
                        Some((_, l, c)) => return self.err(l, c, "expected '}'"),
                        None => return self.err(self.line, self.col, "unexpected end of input"),
                    }
                    self.expect_dot()?;
                    let a = self.program.intern(&name);
                    let copy = self.program.intern(&choice_copy_name(&name));
                    self.program.mark_choice_copy(copy);
                    self.push_checked(Rule::new(vec![a, copy], vec![], vec![]), line, col)?;
                }
                Tok::Ident(first) => {
                    if first == "not" {
                        return self.err(line, col, "'not' is reserved and cannot name an atom");
                    }
                    let mut head = vec![self.program.intern(&first)];
                    loop {
                        match self.next_tok()? {
                            Some((Tok::Pipe, _, _)) => {
                                let (name, _, _) = self.expect_ident()?;
                                head.push(self.program.intern(&name));
                            }
                            Some((Tok::Dot, _, _)) => {
                                self.push_checked(Rule::new(head, vec![], vec![]), line, col)?;
                                break;
                            }
                            Some((Tok::ColonDash, _, _)) => {
                                let (pos, neg) = self.parse_body()?;
                                self.push_checked(Rule::new(head, pos, neg), line, col)?;
                                break;
                            }
                            Some((_, l, c)) => {
                                return self.err(l, c, "expected '|', ':-' or '.' after head")
                            }
                            None => {
                                return self.err(self.line, self.col, "unexpected end of input")
                            }
                        }
                    }
                }
                Tok::ColonDash => {
                    let (pos, neg) = self.parse_body()?;
                    self.push_checked(Rule::new(vec![], pos, neg), line, col)?;
                }
                _ => return self.err(line, col, "expected a statement"),
            }
        }
        Ok(self.program)
    }

    /// Parses `lit ("," lit)* "."` and returns (positive, negative) atoms.
    fn parse_body(&mut self) -> Result<(Vec<AtomId>, Vec<AtomId>), ParseError> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        loop {
            match self.next_tok()? {
                Some((Tok::Ident(s), line, col)) => {
                    if s == "not" {
                        let (name, _, _) = self.expect_ident()?;
                        neg.push(self.program.intern(&name));
                    } else {
                        let _ = (line, col);
                        pos.push(self.program.intern(&s));
                    }
                }
                Some((_, l, c)) => return self.err(l, c, "expected a body literal"),
                None => return self.err(self.line, self.col, "unexpected end of input"),
            }
            match self.next_tok()? {
                Some((Tok::Comma, _, _)) => continue,
                Some((Tok::Dot, _, _)) => return Ok((pos, neg)),
                Some((_, l, c)) => return self.err(l, c, "expected ',' or '.' in body"),
                None => return self.err(self.line, self.col, "unexpected end of input"),
            }
        }
    }

    fn expect_dot(&mut self) -> Result<(), ParseError> {
        match self.next_tok()? {
            Some((Tok::Dot, _, _)) => Ok(()),
            Some((_, l, c)) => self.err(l, c, "expected '.'"),
            None => self.err(self.line, self.col, "unexpected end of input"),
        }
    }

    /// Rejects degenerate rules and drops exact duplicates.
    fn push_checked(&mut self, rule: Rule, line: usize, col: usize) -> Result<(), ParseError> {
        for &a in &rule.pos {
            if rule.neg.binary_search(&a).is_ok() {
                return self.err(
                    line,
                    col,
                    format!(
                        "atom '{}' occurs both positively and negatively in one body",
                        self.program.atom_name(a)
                    ),
                );
            }
        }
        if self.seen.insert(rule.clone()) {
            self.program.push_rule(rule);
        }
        Ok(())
    }
}

/// Whether `i` satisfies rule `r`: some head or negative-body atom is in `i`,
/// or some positive-body atom is missing from `i`.
pub fn satisfies_rule(i: &Interpretation, r: &Rule) -> bool {
    r.head.iter().any(|&a| i.contains(a as usize))
        || r.neg.iter().any(|&a| i.contains(a as usize))
        || r.pos.iter().any(|&a| !i.contains(a as usize))
}

/// Whether `i` is a model of every rule of `p`.
pub fn satisfies(i: &Interpretation, p: &Program) -> bool {
    p.rules().iter().all(|r| satisfies_rule(i, r))
}

/// The reduct of `p` under `i`: rules blocked by a true negative literal are
/// dropped, all other rules lose their negative body.
pub fn gl_reduct(p: &Program, i: &Interpretation) -> Program {
    let mut out = p.clone();
    out.rules = p
        .rules()
        .iter()
        .filter(|r| !r.neg.iter().any(|&a| i.contains(a as usize)))
        .map(|r| Rule {
            head: r.head.clone(),
            pos: r.pos.clone(),
            neg: Vec::new(),
        })
        .collect();
    out
}

/// Whether rule `r` proves atom `a` under `i` and level map `sigma`: the
/// positive body holds, nothing blocks the rule, `a` is the only true head
/// atom, and every positive body atom inside `a`'s SCC has a strictly smaller
/// level.
///
/// `a` must be a head atom of `r`, and `sigma` must be defined on `a` and on
/// the positive body atoms sharing `a`'s SCC; violating either is a bug in the
/// caller.
pub fn proves(r: &Rule, a: AtomId, i: &Interpretation, sigma: &LevelMap, scc: &SccInfo) -> bool {
    assert!(
        r.head.binary_search(&a).is_ok(),
        "proves: atom {a} is not a head atom of the rule"
    );
    let level = |x: AtomId| {
        sigma
            .get(x)
            .unwrap_or_else(|| panic!("proves: sigma is undefined on atom {x}"))
    };
    if r.pos.iter().any(|&b| !i.contains(b as usize)) {
        return false;
    }
    if r.neg.iter().any(|&b| i.contains(b as usize)) {
        return false;
    }
    if r.head.iter().any(|&h| h != a && i.contains(h as usize)) {
        return false;
    }
    let ca = scc.scc_of(a);
    r.pos
        .iter()
        .filter(|&&b| scc.scc_of(b) == ca)
        .all(|&b| level(b) < level(a))
}

/// The unique minimal level map proving every atom of `i`, or None if some
/// atom cannot be proven. Levels are assigned by rounds: an atom gets level k
/// when some rule proves it using only SCC-internal body atoms of level < k.
pub fn minimal_level_map(p: &Program, i: &Interpretation, scc: &SccInfo) -> Option<LevelMap> {
    let mut head_rules: HashMap<AtomId, Vec<usize>> = HashMap::new();
    for (ri, r) in p.rules().iter().enumerate() {
        for &h in &r.head {
            if i.contains(h as usize) {
                head_rules.entry(h).or_default().push(ri);
            }
        }
    }
    let mut level: HashMap<AtomId, u32> = HashMap::new();
    let mut pending: Vec<AtomId> = i.iter().map(|a| a as AtomId).collect();
    if pending.is_empty() {
        return Some(LevelMap::new());
    }
    let max_rounds = pending.iter().map(|&a| scc.ell_scc(a)).max().unwrap();
    for k in 0..max_rounds {
        let mut progressed = false;
        let mut still = Vec::new();
        for &a in &pending {
            let ca = scc.scc_of(a);
            let provable = head_rules.get(&a).is_some_and(|ris| {
                ris.iter().any(|&ri| {
                    let r = &p.rules()[ri];
                    r.pos.iter().all(|&b| i.contains(b as usize))
                        && !r.neg.iter().any(|&b| i.contains(b as usize))
                        && !r.head.iter().any(|&h| h != a && i.contains(h as usize))
                        && r.pos
                            .iter()
                            .filter(|&&b| scc.scc_of(b) == ca)
                            .all(|&b| level.get(&b).is_some_and(|&l| l < k))
                })
            });
            if provable {
                debug_assert!(k < scc.ell_scc(a), "level exceeds the SCC size cap");
                level.insert(a, k);
                progressed = true;
            } else {
                still.push(a);
            }
        }
        pending = still;
        if pending.is_empty() {
            return Some(level.into_iter().collect());
        }
        if !progressed {
            return None;
        }
    }
    None
}

/// Whether `i` is an answer set of the head-cycle-free program `p`: a model
/// whose atoms are all provable under some (equivalently, the minimal) level
/// map. Rejects non-HCF programs.
pub fn is_answer_set(
    p: &Program,
    i: &Interpretation,
    scc: &SccInfo,
) -> Result<bool, SemanticsError> {
    check_hcf(p, scc)?;
    Ok(satisfies(i, p) && minimal_level_map(p, i, scc).is_some())
}

/// Errors unless no rule has two distinct head atoms in one SCC.
pub fn check_hcf(p: &Program, scc: &SccInfo) -> Result<(), SemanticsError> {
    for r in p.rules() {
        for (idx, &h1) in r.head.iter().enumerate() {
            for &h2 in &r.head[idx + 1..] {
                if scc.scc_of(h1) == scc.scc_of(h2) {
                    return Err(SemanticsError::NotHcf(
                        p.atom_name(h1).to_string(),
                        p.atom_name(h2).to_string(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Computes the class flags of `p` from its SCC structure: tight means the
/// positive dependency graph is acyclic (self-loops included), normal means
/// every head has at most one atom, head-cycle-free means no two distinct
/// head atoms of one rule share an SCC.
pub fn classify(p: &Program, scc: &SccInfo) -> Classification {
    Classification {
        is_tight: scc.is_acyclic(),
        is_normal: p.rules().iter().all(|r| r.head.len() <= 1),
        is_hcf: check_hcf(p, scc).is_ok(),
    }
}

//! Line-oriented block grammar for categories, cone lists, spaces, directed
//! sets, theories and convergence tables.
//!
//! ```text
//! category C { objects: A B; morphisms: f: A -> B; compose: ; }
//! cones S { ambient: C; mono m: f; }
//! space X { points: a b; opens: {} {b} {a b}; }
//! directed D { points: p q; le: p p, p q, q q; }
//! theory P { builtin: pointed; }
//! convergence K { points: a b; bound: 2; net D (a b) -> b; }
//! ```
//!
//! Parsing checks syntax and then builds every block, so a parsed
//! [`Document`] only holds values that pass their module's validator.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::fincat::{FinCategory, FunctorRep, Morphism};
use crate::lawmonad::{check_clone, CloneTable, TruncClone};
use crate::nettop::{all_directed_sets, ConvergenceOracle, DirectedSet, FinTopSpace, Net, Rule};
use crate::order::Preorder;
use crate::sketch::{monomorphism_cone, Cone, Orientation, Sketch};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InputError {
    #[error("line {line}, column {col}: expected {}, found {found}", expected.join(" or "))]
    Syntax { line: usize, col: usize, expected: Vec<String>, found: String },
    #[error("line {line}, column {col}: {message}")]
    Semantic { line: usize, col: usize, message: String },
    #[error("no {0} block in the input")]
    Missing(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 11] = ["->", "{", "}", ":", ";", ",", ".", "=", "(", ")", "-"];

fn lex(text: &str) -> Result<Vec<Token>, InputError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line_no, col) = (ln + 1, i + 1);
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphanumeric() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: line_no, col });
            } else {
                let rest: String = chars[i..].iter().take(2).collect();
                let sym = SYMBOLS.iter().find(|s| rest.starts_with(*s)).ok_or_else(|| InputError::Syntax {
                    line: line_no,
                    col,
                    expected: vec!["identifier".into(), "punctuation".into()],
                    found: format!("`{c}`"),
                })?;
                i += sym.len();
                out.push(Token { tok: Tok::Sym(sym), line: line_no, col });
            }
        }
    }
    let last = text.lines().count().max(1);
    out.push(Token { tok: Tok::Eof, line: last + 1, col: 1 });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CategoryDecl {
    pub name: String,
    pub objects: Vec<String>,
    /// `(name, source, target)`; identities `id_<object>` are implicit.
    pub morphisms: Vec<(String, String, String)>,
    /// `(g, f, h)` for `g . f = h`.
    pub compose: Vec<(String, String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConeDecl {
    General {
        name: String,
        apex: String,
        shape: String,
        /// Shape object or morphism name to ambient name.
        diagram: Vec<(String, String)>,
        legs: Vec<(String, String)>,
    },
    Mono {
        name: String,
        family: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConesDecl {
    pub name: String,
    pub ambient: Option<String>,
    pub cones: Vec<ConeDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceDecl {
    pub name: String,
    pub points: Vec<String>,
    pub opens: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedDecl {
    pub name: String,
    pub points: Vec<String>,
    pub le: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryBody {
    Builtin {
        name: String,
        monoid: Vec<Vec<usize>>,
    },
    Table {
        arity: usize,
        ops: Vec<(usize, Vec<String>)>,
        proj: Vec<(usize, Vec<String>)>,
        /// `(target arity, operation, arguments, result)`.
        subst: Vec<(usize, String, Vec<String>, String)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryDecl {
    pub name: String,
    pub body: TheoryBody,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceDecl {
    pub name: String,
    pub points: Vec<String>,
    pub bound: usize,
    /// `(directed block, values, limit)`.
    pub nets: Vec<(String, Vec<String>, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Category(CategoryDecl),
    Cones(ConesDecl),
    Space(SpaceDecl),
    Directed(DirectedDecl),
    Theory(TheoryDecl),
    Convergence(ConvergenceDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Category(d) => &d.name,
            Decl::Cones(d) => &d.name,
            Decl::Space(d) => &d.name,
            Decl::Directed(d) => &d.name,
            Decl::Theory(d) => &d.name,
            Decl::Convergence(d) => &d.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Decl::Category(_) => "category",
            Decl::Cones(_) => "cones",
            Decl::Space(_) => "space",
            Decl::Directed(_) => "directed",
            Decl::Theory(_) => "theory",
            Decl::Convergence(_) => "convergence",
        }
    }
}

/// A parsed and validated source document. Equality ignores source positions.
#[derive(Clone, Debug)]
pub struct Document {
    pub items: Vec<Decl>,
    positions: Vec<(usize, usize)>,
}

impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
    }
}

impl Eq for Document {}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, InputError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(InputError::Syntax {
            line: t.line,
            col: t.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        })
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(&[&format!("`{s}`")])
        }
    }

    fn at_ident(&self) -> bool {
        matches!(self.peek().tok, Tok::Ident(_))
    }

    fn ident(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn number(&mut self) -> PResult<usize> {
        match &self.peek().tok {
            Tok::Ident(s) if s.chars().all(|c| c.is_ascii_digit()) => {
                let v = s.parse().map_err(|_| InputError::Semantic {
                    line: self.peek().line,
                    col: self.peek().col,
                    message: "number out of range".into(),
                })?;
                self.bump();
                Ok(v)
            }
            _ => self.fail(&["number"]),
        }
    }

    fn keyword(&mut self, allowed: &[&str]) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) if allowed.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => {
                let quoted: Vec<String> = allowed.iter().map(|k| format!("`{k}`")).collect();
                let refs: Vec<&str> = quoted.iter().map(String::as_str).collect();
                self.fail(&refs)
            }
        }
    }

    /// Identifiers up to the next `;` (consumed).
    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        while self.at_ident() {
            out.push(self.ident()?);
        }
        if !self.eat_sym(";") {
            return self.fail(&["identifier", "`;`"]);
        }
        Ok(out)
    }

    /// `item (, item)* ;` or an empty list `;`.
    fn comma_list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat_sym(";") {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_sym(";") {
                return Ok(out);
            }
            if !self.eat_sym(",") {
                return self.fail(&["`,`", "`;`"]);
            }
        }
    }

    fn once<T>(&self, slot: &Option<T>, what: &str) -> PResult<()> {
        if slot.is_some() {
            let t = &self.toks[self.pos.saturating_sub(1)];
            return Err(InputError::Semantic {
                line: t.line,
                col: t.col,
                message: format!("duplicate `{what}` statement"),
            });
        }
        Ok(())
    }

    fn document(&mut self) -> PResult<(Vec<Decl>, Vec<(usize, usize)>)> {
        let mut items = Vec::new();
        let mut positions = Vec::new();
        while self.peek().tok != Tok::Eof {
            let start = (self.peek().line, self.peek().col);
            let kind = self.keyword(&["category", "cones", "space", "directed", "theory", "convergence"])?;
            let name = if self.at_ident() { self.ident()? } else { kind.clone() };
            self.sym("{")?;
            let decl = match kind.as_str() {
                "category" => Decl::Category(self.category(name)?),
                "cones" => Decl::Cones(self.cones(name)?),
                "space" => Decl::Space(self.space(name)?),
                "directed" => Decl::Directed(self.directed(name)?),
                "theory" => Decl::Theory(self.theory(name)?),
                _ => Decl::Convergence(self.convergence(name)?),
            };
            items.push(decl);
            positions.push(start);
        }
        Ok((items, positions))
    }

    fn category(&mut self, name: String) -> PResult<CategoryDecl> {
        let mut objects = None;
        let mut morphisms = Vec::new();
        let mut compose = Vec::new();
        while !self.eat_sym("}") {
            match self.keyword(&["objects", "morphisms", "compose", "}"])?.as_str() {
                "objects" => {
                    self.once(&objects, "objects")?;
                    self.sym(":")?;
                    objects = Some(self.ident_list()?);
                }
                "morphisms" => {
                    self.sym(":")?;
                    morphisms.extend(self.comma_list(|p| {
                        let m = p.ident()?;
                        p.sym(":")?;
                        let s = p.ident()?;
                        p.sym("->")?;
                        Ok((m, s, p.ident()?))
                    })?);
                }
                _ => {
                    self.sym(":")?;
                    compose.extend(self.comma_list(|p| {
                        let g = p.ident()?;
                        p.sym(".")?;
                        let f = p.ident()?;
                        p.sym("=")?;
                        Ok((g, f, p.ident()?))
                    })?);
                }
            }
        }
        Ok(CategoryDecl { name, objects: objects.unwrap_or_default(), morphisms, compose })
    }

    fn cones(&mut self, name: String) -> PResult<ConesDecl> {
        let mut ambient = None;
        let mut cones: Vec<ConeDecl> = Vec::new();
        while !self.eat_sym("}") {
            let kw = self.keyword(&["ambient", "cone", "mono", "shape", "diagram", "legs", "}"])?;
            match kw.as_str() {
                "ambient" => {
                    self.once(&ambient, "ambient")?;
                    self.sym(":")?;
                    ambient = Some(self.ident()?);
                    self.sym(";")?;
                }
                "cone" => {
                    let n = self.ident()?;
                    self.sym(":")?;
                    self.keyword(&["apex"])?;
                    let apex = self.ident()?;
                    self.sym(";")?;
                    cones.push(ConeDecl::General {
                        name: n,
                        apex,
                        shape: String::new(),
                        diagram: vec![],
                        legs: vec![],
                    });
                }
                "mono" => {
                    let n = self.ident()?;
                    self.sym(":")?;
                    cones.push(ConeDecl::Mono { name: n, family: self.ident_list()? });
                }
                _ => {
                    let t = self.toks[self.pos - 1].clone();
                    let Some(ConeDecl::General { shape, diagram, legs, .. }) = cones.last_mut() else {
                        return Err(InputError::Semantic {
                            line: t.line,
                            col: t.col,
                            message: format!("`{kw}` must follow a `cone` statement"),
                        });
                    };
                    match kw.as_str() {
                        "shape" => {
                            *shape = self.ident()?;
                            self.sym(";")?;
                        }
                        "diagram" => diagram.extend(self.comma_list(|p| {
                            let a = p.ident()?;
                            p.sym("=")?;
                            Ok((a, p.ident()?))
                        })?),
                        _ => legs.extend(self.comma_list(|p| {
                            let a = p.ident()?;
                            p.sym(":")?;
                            Ok((a, p.ident()?))
                        })?),
                    }
                }
            }
        }
        Ok(ConesDecl { name, ambient, cones })
    }

    fn space(&mut self, name: String) -> PResult<SpaceDecl> {
        let mut points = None;
        let mut opens = None;
        while !self.eat_sym("}") {
            match self.keyword(&["points", "opens", "}"])?.as_str() {
                "points" => {
                    self.once(&points, "points")?;
                    self.sym(":")?;
                    points = Some(self.ident_list()?);
                }
                _ => {
                    self.once(&opens, "opens")?;
                    self.sym(":")?;
                    let mut sets = Vec::new();
                    while self.eat_sym("{") {
                        let mut set = Vec::new();
                        while !self.eat_sym("}") {
                            if !self.at_ident() {
                                return self.fail(&["identifier", "`}`"]);
                            }
                            set.push(self.ident()?);
                        }
                        sets.push(set);
                    }
                    if !self.eat_sym(";") {
                        return self.fail(&["`{`", "`;`"]);
                    }
                    opens = Some(sets);
                }
            }
        }
        Ok(SpaceDecl { name, points: points.unwrap_or_default(), opens: opens.unwrap_or_default() })
    }

    fn directed(&mut self, name: String) -> PResult<DirectedDecl> {
        let mut points = None;
        let mut le = Vec::new();
        while !self.eat_sym("}") {
            match self.keyword(&["points", "le", "}"])?.as_str() {
                "points" => {
                    self.once(&points, "points")?;
                    self.sym(":")?;
                    points = Some(self.ident_list()?);
                }
                _ => {
                    self.sym(":")?;
                    le.extend(self.comma_list(|p| Ok((p.ident()?, p.ident()?)))?);
                }
            }
        }
        Ok(DirectedDecl { name, points: points.unwrap_or_default(), le })
    }

    fn theory(&mut self, name: String) -> PResult<TheoryDecl> {
        let mut builtin: Option<String> = None;
        let mut monoid = Vec::new();
        let mut arity = None;
        let mut ops = Vec::new();
        let mut proj = Vec::new();
        let mut subst = Vec::new();
        while !self.eat_sym("}") {
            match self.keyword(&["builtin", "monoid", "arity", "ops", "proj", "subst", "}"])?.as_str() {
                "builtin" => {
                    self.once(&builtin, "builtin")?;
                    self.sym(":")?;
                    let mut n = self.ident()?;
                    while self.eat_sym("-") {
                        n.push('-');
                        n.push_str(&self.ident()?);
                    }
                    self.sym(";")?;
                    builtin = Some(n);
                }
                "monoid" => {
                    self.sym(":")?;
                    monoid.extend(self.comma_list(|p| {
                        let mut row = vec![p.number()?];
                        while p.at_ident() {
                            row.push(p.number()?);
                        }
                        Ok(row)
                    })?);
                }
                "arity" => {
                    self.once(&arity, "arity")?;
                    self.sym(":")?;
                    arity = Some(self.number()?);
                    self.sym(";")?;
                }
                "ops" => {
                    let i = self.number()?;
                    self.sym(":")?;
                    ops.push((i, self.ident_list()?));
                }
                "proj" => {
                    let i = self.number()?;
                    self.sym(":")?;
                    proj.push((i, self.ident_list()?));
                }
                _ => {
                    let j = self.number()?;
                    self.sym(":")?;
                    subst.extend(self.comma_list(|p| {
                        let f = p.ident()?;
                        p.sym("(")?;
                        let mut args = Vec::new();
                        if !p.eat_sym(")") {
                            loop {
                                args.push(p.ident()?);
                                if p.eat_sym(")") {
                                    break;
                                }
                                if !p.eat_sym(",") {
                                    return p.fail(&["`,`", "`)`"]);
                                }
                            }
                        }
                        p.sym("=")?;
                        Ok((j, f, args, p.ident()?))
                    })?);
                }
            }
        }
        let body = match builtin {
            Some(name) => TheoryBody::Builtin { name, monoid },
            None => TheoryBody::Table { arity: arity.unwrap_or(0), ops, proj, subst },
        };
        Ok(TheoryDecl { name, body })
    }

    fn convergence(&mut self, name: String) -> PResult<ConvergenceDecl> {
        let mut points = None;
        let mut bound = None;
        let mut nets = Vec::new();
        while !self.eat_sym("}") {
            match self.keyword(&["points", "bound", "net", "}"])?.as_str() {
                "points" => {
                    self.once(&points, "points")?;
                    self.sym(":")?;
                    points = Some(self.ident_list()?);
                }
                "bound" => {
                    self.once(&bound, "bound")?;
                    self.sym(":")?;
                    bound = Some(self.number()?);
                    self.sym(";")?;
                }
                _ => {
                    let d = self.ident()?;
                    self.sym("(")?;
                    let mut values = Vec::new();
                    while self.at_ident() {
                        values.push(self.ident()?);
                    }
                    self.sym(")")?;
                    self.sym("->")?;
                    let limit = self.ident()?;
                    self.sym(";")?;
                    nets.push((d, values, limit));
                }
            }
        }
        Ok(ConvergenceDecl { name, points: points.unwrap_or_default(), bound: bound.unwrap_or(1), nets })
    }
}

fn index_of(names: &[String], name: &str, what: &str) -> Result<usize, String> {
    names.iter().position(|n| n == name).ok_or_else(|| format!("unknown {what} `{name}`"))
}

fn unique(names: &[String], what: &str) -> Result<(), String> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(format!("duplicate {what} `{n}`"));
        }
    }
    Ok(())
}

/// Parses and validates a whole document.
pub fn parse_document(text: &str) -> Result<Document, InputError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let (items, positions) = p.document()?;
    let doc = Document { items, positions };
    let mut names = HashSet::new();
    for (k, item) in doc.items.iter().enumerate() {
        if !names.insert(item.name().to_string()) {
            return Err(doc.semantic(k, format!("duplicate block name `{}`", item.name())));
        }
    }
    for k in 0..doc.items.len() {
        doc.build(k)?;
    }
    Ok(doc)
}

/// A built block.
#[derive(Clone, Debug)]
pub enum Value {
    Category(Arc<FinCategory>),
    Sketch(Sketch),
    Space(FinTopSpace),
    Directed(DirectedSet),
    Theory(TruncClone),
    Convergence(ConvergenceOracle),
}

impl Document {
    fn semantic(&self, k: usize, message: String) -> InputError {
        let (line, col) = self.positions.get(k).copied().unwrap_or((0, 0));
        InputError::Semantic { line, col, message }
    }

    fn position(&self, kind: &'static str, name: Option<&str>) -> Result<usize, InputError> {
        self.items
            .iter()
            .position(|d| d.kind() == kind && name.is_none_or(|n| d.name() == n))
            .ok_or(InputError::Missing(kind))
    }

    /// Names of the blocks of one kind, in document order.
    pub fn names(&self, kind: &str) -> Vec<String> {
        self.items.iter().filter(|d| d.kind() == kind).map(|d| d.name().to_string()).collect()
    }

    pub fn build(&self, k: usize) -> Result<Value, InputError> {
        let built = match &self.items[k] {
            Decl::Category(d) => build_category(d).map(|c| Value::Category(Arc::new(c))),
            Decl::Cones(d) => self.build_sketch(d).map(Value::Sketch),
            Decl::Space(d) => build_space(d).map(Value::Space),
            Decl::Directed(d) => build_directed(d).map(Value::Directed),
            Decl::Theory(d) => build_theory(d).map(Value::Theory),
            Decl::Convergence(d) => self.build_convergence(d).map(Value::Convergence),
        };
        built.map_err(|m| self.semantic(k, format!("{} `{}`: {m}", self.items[k].kind(), self.items[k].name())))
    }

    fn lookup(&self, kind: &'static str, name: Option<&str>) -> Result<Value, InputError> {
        self.build(self.position(kind, name)?)
    }

    pub fn category(&self, name: Option<&str>) -> Result<Arc<FinCategory>, InputError> {
        match self.lookup("category", name)? {
            Value::Category(c) => Ok(c),
            _ => unreachable!("category block builds a category"),
        }
    }

    pub fn sketch(&self, name: Option<&str>) -> Result<Sketch, InputError> {
        match self.lookup("cones", name)? {
            Value::Sketch(s) => Ok(s),
            _ => unreachable!("cones block builds a sketch"),
        }
    }

    pub fn space(&self, name: Option<&str>) -> Result<FinTopSpace, InputError> {
        match self.lookup("space", name)? {
            Value::Space(s) => Ok(s),
            _ => unreachable!("space block builds a space"),
        }
    }

    pub fn directed(&self, name: Option<&str>) -> Result<DirectedSet, InputError> {
        match self.lookup("directed", name)? {
            Value::Directed(d) => Ok(d),
            _ => unreachable!("directed block builds a directed set"),
        }
    }

    pub fn theory(&self, name: Option<&str>) -> Result<TruncClone, InputError> {
        match self.lookup("theory", name)? {
            Value::Theory(t) => Ok(t),
            _ => unreachable!("theory block builds a theory"),
        }
    }

    pub fn convergence(&self, name: Option<&str>) -> Result<ConvergenceOracle, InputError> {
        match self.lookup("convergence", name)? {
            Value::Convergence(o) => Ok(o),
            _ => unreachable!("convergence block builds an oracle"),
        }
    }

    fn build_sketch(&self, d: &ConesDecl) -> Result<Sketch, String> {
        let amb_decl = match &d.ambient {
            Some(n) => self.items.iter().find_map(|i| match i {
                Decl::Category(c) if &c.name == n => Some(c),
                _ => None,
            }),
            None => self.items.iter().find_map(|i| match i {
                Decl::Category(c) => Some(c),
                _ => None,
            }),
        }
        .ok_or("no ambient category")?;
        let ambient = Arc::new(build_category(amb_decl)?);
        let mut cones = Vec::new();
        let mut names = HashSet::new();
        for c in &d.cones {
            match c {
                ConeDecl::Mono { name, family } => {
                    if !names.insert(name) {
                        return Err(format!("duplicate cone `{name}`"));
                    }
                    let fam = family
                        .iter()
                        .map(|m| ambient.morphism_by_name(m).map_err(|e| e.to_string()))
                        .collect::<Result<Vec<_>, _>>()?;
                    cones.push(monomorphism_cone(&ambient, name, &fam).map_err(|e| e.to_string())?);
                }
                ConeDecl::General { name, apex, shape, diagram, legs } => {
                    if !names.insert(name) {
                        return Err(format!("duplicate cone `{name}`"));
                    }
                    let shape_decl = self
                        .items
                        .iter()
                        .find_map(|i| match i {
                            Decl::Category(c) if &c.name == shape => Some(c),
                            _ => None,
                        })
                        .ok_or_else(|| format!("cone `{name}`: unknown shape `{shape}`"))?;
                    let sh = Arc::new(build_category(shape_decl)?);
                    let assigned: HashMap<&str, &str> = diagram.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                    let obj_map = (0..sh.num_objects())
                        .map(|j| {
                            let o = sh.object_name(j);
                            let target =
                                assigned.get(o).ok_or_else(|| format!("cone `{name}`: object `{o}` unassigned"))?;
                            ambient.object_by_name(target).map_err(|e| e.to_string())
                        })
                        .collect::<Result<Vec<_>, String>>()?;
                    let mor_map = (0..sh.num_morphisms())
                        .map(|u| match assigned.get(sh.name(u)) {
                            Some(t) => ambient.morphism_by_name(t).map_err(|e| e.to_string()),
                            None if sh.is_identity(u) => Ok(ambient.id(obj_map[sh.src(u)])),
                            None => Err(format!("cone `{name}`: morphism `{}` unassigned", sh.name(u))),
                        })
                        .collect::<Result<Vec<_>, String>>()?;
                    for k in assigned.keys() {
                        if sh.object_by_name(k).is_err() && sh.morphism_by_name(k).is_err() {
                            return Err(format!("cone `{name}`: `{k}` is not in shape `{shape}`"));
                        }
                    }
                    let leg_map: HashMap<&str, &str> = legs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                    let leg_list = (0..sh.num_objects())
                        .map(|j| {
                            let o = sh.object_name(j);
                            let l = leg_map.get(o).ok_or_else(|| format!("cone `{name}`: no leg at `{o}`"))?;
                            ambient.morphism_by_name(l).map_err(|e| e.to_string())
                        })
                        .collect::<Result<Vec<_>, String>>()?;
                    let apex = ambient.object_by_name(apex).map_err(|e| e.to_string())?;
                    let diagram = FunctorRep { source: sh, target: ambient.clone(), obj_map, mor_map };
                    cones.push(Cone::new(name.clone(), apex, diagram, leg_list));
                }
            }
        }
        Sketch::new(d.name.clone(), ambient, cones, Orientation::Limit).map_err(|e| e.to_string())
    }

    fn build_convergence(&self, d: &ConvergenceDecl) -> Result<ConvergenceOracle, String> {
        unique(&d.points, "point")?;
        let mut table: HashSet<(Net, usize)> = HashSet::new();
        for (dref, values, limit) in &d.nets {
            let dd = self
                .items
                .iter()
                .find_map(|i| match i {
                    Decl::Directed(x) if &x.name == dref => Some(x),
                    _ => None,
                })
                .ok_or_else(|| format!("unknown directed set `{dref}`"))?;
            let index = build_directed(dd)?;
            if index.size() > d.bound {
                return Err(format!("directed set `{dref}` exceeds the bound {}", d.bound));
            }
            if values.len() != index.size() {
                return Err(format!("net over `{dref}` needs {} values", index.size()));
            }
            let vals = values.iter().map(|v| index_of(&d.points, v, "point")).collect::<Result<Vec<_>, _>>()?;
            let lim = index_of(&d.points, limit, "point")?;
            table.insert((Net::new(index, vals).canonical(), lim));
        }
        let table = Arc::new(table);
        let rule: Rule = Arc::new(move |x: &Net, p: usize| table.contains(&(x.canonical(), p)));
        Ok(ConvergenceOracle::with_index_sets(d.points.len(), all_directed_sets(d.bound), d.bound, rule))
    }

    /// Prints the document in normal form; `parse_document(print())` returns an equal document.
    pub fn print(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            print_decl(&mut out, item);
        }
        out
    }
}

fn build_category(d: &CategoryDecl) -> Result<FinCategory, String> {
    let mut names: Vec<String> = d.objects.iter().map(|o| format!("id_{o}")).collect();
    unique(&d.objects, "object")?;
    let n = d.objects.len();
    let mut morphisms: Vec<Morphism> =
        d.objects.iter().enumerate().map(|(i, o)| Morphism::new(format!("id_{o}"), i, i)).collect();
    for (m, s, t) in &d.morphisms {
        names.push(m.clone());
        morphisms.push(Morphism::new(
            m.clone(),
            index_of(&d.objects, s, "object")?,
            index_of(&d.objects, t, "object")?,
        ));
    }
    unique(&names, "morphism")?;
    let mut table = HashMap::new();
    for (g, f, h) in &d.compose {
        let (gi, fi, hi) =
            (index_of(&names, g, "morphism")?, index_of(&names, f, "morphism")?, index_of(&names, h, "morphism")?);
        let (mg, mf, mh) = (&morphisms[gi], &morphisms[fi], &morphisms[hi]);
        if mf.tgt != mg.src || mh.src != mf.src || mh.tgt != mg.tgt {
            return Err(format!("composite `{g} . {f} = {h}` has mismatched endpoints"));
        }
        if table.insert((gi, fi), hi).is_some_and(|old| old != hi) {
            return Err(format!("composite `{g} . {f}` given twice"));
        }
    }
    let ends: Vec<(usize, usize)> = morphisms.iter().map(|m| (m.src, m.tgt)).collect();
    FinCategory::try_new(d.objects.clone(), morphisms, (0..n).collect(), |g, f| {
        if ends[f].1 != ends[g].0 {
            None
        } else if g < n {
            Some(f)
        } else if f < n {
            Some(g)
        } else {
            table.get(&(g, f)).copied()
        }
    })
    .map_err(|e| e.to_string())
}

fn build_space(d: &SpaceDecl) -> Result<FinTopSpace, String> {
    unique(&d.points, "point")?;
    let opens = d
        .opens
        .iter()
        .map(|set| set.iter().try_fold(0u64, |m, p| Ok::<_, String>(m | 1 << index_of(&d.points, p, "point")?)))
        .collect::<Result<Vec<_>, _>>()?;
    let full = if d.points.is_empty() { 0 } else { u64::MAX >> (64 - d.points.len()) };
    if !opens.contains(&full) {
        return Err("carrier not open".into());
    }
    if !opens.contains(&0) {
        return Err("empty set not open".into());
    }
    FinTopSpace::new(d.points.len(), opens).map_err(|e| e.to_string())
}

fn build_directed(d: &DirectedDecl) -> Result<DirectedSet, String> {
    unique(&d.points, "point")?;
    let pairs =
        d.le.iter()
            .map(|(a, b)| Ok((index_of(&d.points, a, "point")?, index_of(&d.points, b, "point")?)))
            .collect::<Result<Vec<_>, String>>()?;
    DirectedSet::new(Preorder::from_pairs(d.points.len(), &pairs)).map_err(|e| e.to_string())
}

fn build_theory(d: &TheoryDecl) -> Result<TruncClone, String> {
    match &d.body {
        TheoryBody::Builtin { name, monoid } => {
            if name == "monoid-action" {
                let rows: Vec<String> =
                    monoid.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect();
                TruncClone::builtin(&format!("monoid-action:{}", rows.join(";"))).map_err(|e| e.to_string())
            } else if !monoid.is_empty() {
                Err("`monoid` only applies to monoid-action".into())
            } else {
                TruncClone::builtin(name).map_err(|e| e.to_string())
            }
        }
        TheoryBody::Table { arity, ops, proj, subst } => {
            let n = *arity;
            if n > 6 {
                return Err(format!("table theories are limited to arity 6, got {n}"));
            }
            let mut names = vec![None; n + 1];
            for (i, list) in ops {
                let slot = names.get_mut(*i).ok_or_else(|| format!("ops {i} exceeds the arity"))?;
                if slot.is_some() {
                    return Err(format!("ops {i} given twice"));
                }
                unique(list, "operation")?;
                *slot = Some(list.clone());
            }
            let names: Vec<Vec<String>> = names
                .into_iter()
                .enumerate()
                .map(|(i, s)| s.ok_or_else(|| format!("missing ops {i}")))
                .collect::<Result<_, _>>()?;
            let mut projections = vec![None; n + 1];
            projections[0] = Some(Vec::new());
            for (i, list) in proj {
                let slot = projections.get_mut(*i).ok_or_else(|| format!("proj {i} exceeds the arity"))?;
                if list.len() != *i {
                    return Err(format!("proj {i} needs {i} names"));
                }
                *slot = Some(list.iter().map(|p| index_of(&names[*i], p, "operation")).collect::<Result<Vec<_>, _>>()?);
            }
            let projections: Vec<Vec<usize>> = projections
                .into_iter()
                .enumerate()
                .map(|(i, s)| s.ok_or_else(|| format!("missing proj {i}")))
                .collect::<Result<_, _>>()?;
            let mut table = HashMap::new();
            for (j, f, args, h) in subst {
                let i = args.len();
                if i > n || *j > n {
                    return Err(format!("substitution {f}(..) exceeds the arity"));
                }
                let fi = index_of(&names[i], f, "operation")?;
                let gs = args.iter().map(|g| index_of(&names[*j], g, "operation")).collect::<Result<Vec<_>, _>>()?;
                let hi = index_of(&names[*j], h, "operation")?;
                table.insert((i, fi, *j, gs), hi);
            }
            let t = TruncClone::from_table(d.name.clone(), CloneTable { names, proj: projections, subst: table });
            match check_clone(&t, n) {
                Ok(None) => Ok(t),
                Ok(Some(w)) => Err(format!("{} law fails at arities {:?}", w.law, w.arities)),
                Err(e) => Err(e.to_string()),
            }
        }
    }
}

fn print_decl(out: &mut String, item: &Decl) {
    let _ = writeln!(out, "{} {} {{", item.kind(), item.name());
    match item {
        Decl::Category(d) => {
            let _ = writeln!(out, "  objects: {};", d.objects.join(" "));
            let ms: Vec<String> = d.morphisms.iter().map(|(m, s, t)| format!("{m}: {s} -> {t}")).collect();
            let _ = writeln!(out, "  morphisms: {};", ms.join(", "));
            let cs: Vec<String> = d.compose.iter().map(|(g, f, h)| format!("{g} . {f} = {h}")).collect();
            let _ = writeln!(out, "  compose: {};", cs.join(", "));
        }
        Decl::Cones(d) => {
            if let Some(a) = &d.ambient {
                let _ = writeln!(out, "  ambient: {a};");
            }
            for c in &d.cones {
                match c {
                    ConeDecl::Mono { name, family } => {
                        let _ = writeln!(out, "  mono {name}: {};", family.join(" "));
                    }
                    ConeDecl::General { name, apex, shape, diagram, legs } => {
                        let _ = writeln!(out, "  cone {name}: apex {apex};");
                        let _ = writeln!(out, "  shape {shape};");
                        let ds: Vec<String> = diagram.iter().map(|(a, b)| format!("{a} = {b}")).collect();
                        let _ = writeln!(out, "  diagram {};", ds.join(", "));
                        let ls: Vec<String> = legs.iter().map(|(a, b)| format!("{a}: {b}")).collect();
                        let _ = writeln!(out, "  legs {};", ls.join(", "));
                    }
                }
            }
        }
        Decl::Space(d) => {
            let _ = writeln!(out, "  points: {};", d.points.join(" "));
            let os: Vec<String> = d.opens.iter().map(|s| format!("{{{}}}", s.join(" "))).collect();
            let _ = writeln!(out, "  opens: {};", os.join(" "));
        }
        Decl::Directed(d) => {
            let _ = writeln!(out, "  points: {};", d.points.join(" "));
            let ls: Vec<String> = d.le.iter().map(|(a, b)| format!("{a} {b}")).collect();
            let _ = writeln!(out, "  le: {};", ls.join(", "));
        }
        Decl::Theory(d) => match &d.body {
            TheoryBody::Builtin { name, monoid } => {
                let _ = writeln!(out, "  builtin: {name};");
                if !monoid.is_empty() {
                    let rows: Vec<String> =
                        monoid.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).collect();
                    let _ = writeln!(out, "  monoid: {};", rows.join(", "));
                }
            }
            TheoryBody::Table { arity, ops, proj, subst } => {
                let _ = writeln!(out, "  arity: {arity};");
                for (i, names) in ops {
                    let _ = writeln!(out, "  ops {i}: {};", names.join(" "));
                }
                for (i, names) in proj {
                    let _ = writeln!(out, "  proj {i}: {};", names.join(" "));
                }
                let targets: BTreeSet<usize> = subst.iter().map(|s| s.0).collect();
                for j in targets {
                    let es: Vec<String> = subst
                        .iter()
                        .filter(|s| s.0 == j)
                        .map(|(_, f, args, h)| format!("{f}({}) = {h}", args.join(", ")))
                        .collect();
                    let _ = writeln!(out, "  subst {j}: {};", es.join(", "));
                }
            }
        },
        Decl::Convergence(d) => {
            let _ = writeln!(out, "  points: {};", d.points.join(" "));
            let _ = writeln!(out, "  bound: {};", d.bound);
            for (dref, values, limit) in &d.nets {
                let _ = writeln!(out, "  net {dref} ({}) -> {limit};", values.join(" "));
            }
        }
    }
    out.push_str("}\n");
}

fn only(doc: &Document, kind: &'static str) -> Result<(), InputError> {
    doc.position(kind, None).map(|_| ())
}

pub fn parse_space(text: &str) -> Result<FinTopSpace, InputError> {
    let doc = parse_document(text)?;
    only(&doc, "space")?;
    doc.space(None)
}

pub fn parse_directed(text: &str) -> Result<DirectedSet, InputError> {
    let doc = parse_document(text)?;
    only(&doc, "directed")?;
    doc.directed(None)
}

pub fn parse_sketch(text: &str) -> Result<Sketch, InputError> {
    parse_document(text)?.sketch(None)
}

pub fn parse_theory(text: &str) -> Result<TruncClone, InputError> {
    parse_document(text)?.theory(None)
}

pub fn parse_convergence(text: &str) -> Result<ConvergenceOracle, InputError> {
    parse_document(text)?.convergence(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{is_realized, realization_failure};

    #[test]
    fn space_examples() {
        let s = parse_space("space { points: a b; opens: {} {b} {a b}; }").unwrap();
        assert_eq!(s, FinTopSpace::new(2, vec![0, 0b10, 0b11]).unwrap());
        let e = parse_space("space { points: a; opens: {}; }").unwrap_err();
        assert!(e.to_string().contains("carrier not open"), "{e}");
    }

    #[test]
    fn directed_example() {
        let d = parse_directed("directed { points: p q; le: p p, p q, q q; }").unwrap();
        assert_eq!(d, DirectedSet::chain(2));
        assert!(parse_directed("directed { points: p q; le: p p, q q; }").is_err());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_document("space {\n  points: a b\n  opens: {};\n}").unwrap_err();
        match e {
            InputError::Syntax { line, col, expected, found } => {
                assert_eq!((line, col), (3, 8));
                assert!(expected.contains(&"`;`".to_string()));
                assert_eq!(found, "`:`");
            }
            other => panic!("{other}"),
        }
        let e = parse_document("spaces {}").unwrap_err();
        assert!(matches!(e, InputError::Syntax { line: 1, col: 1, .. }));
        assert!(matches!(parse_document("space { points: a$; }"), Err(InputError::Syntax { col: 18, .. })));
    }

    const PREORDER_LIKE: &str = "
        # a reflexive pair with a jointly monic cone
        category E {
          objects: X R;
          morphisms: r1: R -> X, r2: R -> X, i: X -> R, e1: R -> R, e2: R -> R;
          compose: r1 . i = id_X, r2 . i = id_X,
                   i . r1 = e1, i . r2 = e2,
                   r1 . e1 = r1, r2 . e1 = r1, r1 . e2 = r2, r2 . e2 = r2,
                   e1 . i = i, e2 . i = i,
                   e1 . e1 = e1, e1 . e2 = e2, e2 . e1 = e1, e2 . e2 = e2;
        }
        category pair { objects: a b; morphisms: ; compose: ; }
        cones S {
          ambient: E;
          mono relation: r1 r2;
          cone product: apex R;
          shape pair;
          diagram a = X, b = X;
          legs a: r1, b: r2;
        }
    ";

    #[test]
    fn sketch_document_round_trip() {
        let doc = parse_document(PREORDER_LIKE).unwrap();
        let s = doc.sketch(Some("S")).unwrap();
        assert_eq!(s.cones.len(), 2);
        assert_eq!(s.ambient.num_morphisms(), 7);
        let again = parse_document(&doc.print()).unwrap();
        assert_eq!(again, doc);
        assert_eq!(again.print(), doc.print());
        // Hom(R, -) sends the product cone to Hom(R,X)^2 with 2 x 2 = 4 elements, but Hom(R, R) has 3
        assert!(!is_realized(&s));
        assert_eq!(realization_failure(&s).unwrap().cone, "product");
    }

    #[test]
    fn incomplete_composition_is_rejected() {
        let text = "category C { objects: A; morphisms: e: A -> A; compose: ; }";
        let e = parse_document(text).unwrap_err();
        assert!(matches!(e, InputError::Semantic { line: 1, col: 1, .. }), "{e}");
    }

    #[test]
    fn theory_blocks() {
        let doc =
            parse_document("theory P { builtin: pointed; } theory M { builtin: monoid-action; monoid: 0 1, 1 0; }")
                .unwrap();
        assert_eq!(doc.theory(Some("P")).unwrap().size(2), 3);
        assert_eq!(doc.theory(Some("M")).unwrap().size(2), 4);
        assert_eq!(parse_document(&doc.print()).unwrap(), doc);
        // pointed sets written out as a table up to arity 1
        let table = "theory T {
            arity: 1;
            ops 0: bot;
            ops 1: x bot1;
            proj 1: x;
            subst 0: bot1(bot) = bot;
            subst 1: bot() = bot1, bot1(bot1) = bot1;
        }";
        let doc = parse_document(table).unwrap();
        let t = doc.theory(None).unwrap();
        assert_eq!(t.subst(1, 1, 0, &[0]).unwrap(), 0);
        assert_eq!(parse_document(&doc.print()).unwrap(), doc);
        let broken = table.replace("bot1(bot1) = bot1", "bot1(bot1) = x");
        assert!(parse_document(&broken).is_err());
        let missing = table.replace(", bot1(bot1) = bot1", "");
        assert!(parse_document(&missing).unwrap_err().to_string().contains("no entry"));
    }

    #[test]
    fn convergence_table() {
        let text = "
            directed one { points: o; le: o o; }
            directed two { points: p q; le: p p, p q, q q; }
            convergence K {
              points: a b;
              bound: 1;
              net one (a) -> a;
              net one (b) -> b;
              net one (b) -> a;
            }";
        let doc = parse_document(text).unwrap();
        let o = doc.convergence(None).unwrap();
        let t = crate::nettop::topology_from_convergence(&o).unwrap();
        assert_eq!(t, FinTopSpace::new(2, vec![0, 0b10, 0b11]).unwrap());
        assert_eq!(parse_document(&doc.print()).unwrap(), doc);
        let too_big = text.replace("net one (a) -> a", "net two (a b) -> a");
        assert!(parse_document(&too_big).is_err());
    }
}

//! Ordered labeled trees, the bracket text notation, and labeled datasets.
//!
//! Trees are written as `label` or `label(child,child,...)`, e.g. `a(b(a,b),a)`.
//! Whitespace between tokens is accepted when parsing; serialization is
//! canonical and has none.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token reserved for the gap element of the edit-cost domain.
pub const GAP: &str = "-";

/// A symbol of the label alphabet, a non-empty `[A-Za-z0-9_]+` token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name == GAP {
            return Err(Error::ReservedGap);
        }
        if name.is_empty() || !name.bytes().all(is_symbol_byte) {
            return Err(Error::InvalidSymbol(name));
        }
        Ok(Symbol(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_symbol_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Ordered set of distinct symbols. The gap is addressed as index `len()`.
#[derive(Debug, Clone)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
    index: HashMap<Symbol, usize>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Alphabet {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::DuplicateSymbol(s.to_string()));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let symbols = names
            .iter()
            .map(|n| Symbol::new(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Alphabet::new(symbols)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Index used for the gap in cost tables.
    pub fn gap(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &Symbol) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn index_of_name(&self, name: &str) -> Option<usize> {
        if name == GAP {
            return Some(self.gap());
        }
        self.symbols.iter().position(|s| s.as_str() == name)
    }

    /// Name of an extended index, with the gap rendered as `-`.
    pub fn name(&self, index: usize) -> &str {
        if index == self.gap() {
            GAP
        } else {
            self.symbols[index].as_str()
        }
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.index.contains_key(symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    pub label: Symbol,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn leaf(label: Symbol) -> Self {
        Tree {
            label,
            children: Vec::new(),
        }
    }

    pub fn new(label: Symbol, children: Vec<Tree>) -> Self {
        Tree { label, children }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    pub fn preorder(&self) -> Vec<&Symbol> {
        let mut out = Vec::with_capacity(self.size());
        self.preorder_into(&mut out);
        out
    }

    fn preorder_into<'a>(&'a self, out: &mut Vec<&'a Symbol>) {
        out.push(&self.label);
        for c in &self.children {
            c.preorder_into(out);
        }
    }

    /// Checks that every label belongs to `alphabet`.
    pub fn validate(&self, alphabet: &Alphabet) -> Result<()> {
        if !alphabet.contains(&self.label) {
            return Err(Error::UnknownSymbol(self.label.to_string()));
        }
        self.children.iter().try_for_each(|c| c.validate(alphabet))
    }

    /// Number of nodes carrying each alphabet symbol.
    pub fn label_counts(&self, alphabet: &Alphabet) -> Result<Vec<usize>> {
        let mut counts = vec![0; alphabet.len()];
        for s in self.preorder() {
            let i = alphabet
                .index_of(s)
                .ok_or_else(|| Error::UnknownSymbol(s.to_string()))?;
            counts[i] += 1;
        }
        Ok(counts)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Canonical text form: no whitespace, commas between siblings.
pub fn serialize_tree(tree: &Tree) -> String {
    tree.to_string()
}

/// Parses the bracket notation and checks every label against `alphabet`.
pub fn parse_tree(text: &str, alphabet: &Alphabet) -> Result<Tree> {
    let tree = parse_tree_unchecked(text)?;
    tree.validate(alphabet)?;
    Ok(tree)
}

/// Parses the bracket notation without an alphabet check.
pub fn parse_tree_unchecked(text: &str) -> Result<Tree> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let tree = p.tree()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input after tree"));
    }
    Ok(tree)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn label(&mut self) -> Result<Symbol> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(start) == Some(&b'-') {
            return Err(Error::ReservedGap);
        }
        while self.pos < self.src.len() && is_symbol_byte(self.src[self.pos]) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a label"));
        }
        // only ASCII bytes were consumed
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii label");
        Symbol::new(name)
    }

    fn tree(&mut self) -> Result<Tree> {
        let label = self.label()?;
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                children.push(self.tree()?);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected ',' or ')'")),
                }
            }
        }
        Ok(Tree { label, children })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub tree: Tree,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub alphabet: Alphabet,
    pub records: Vec<Record>,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    alphabet: Vec<String>,
    records: Vec<RecordFile>,
}

#[derive(Serialize, Deserialize)]
struct RecordFile {
    tree: String,
    label: String,
}

impl Dataset {
    pub fn new(alphabet: Alphabet, records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for r in &records {
            r.tree.validate(&alphabet)?;
        }
        Ok(Dataset { alphabet, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn trees(&self) -> Vec<&Tree> {
        self.records.iter().map(|r| &r.tree).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.label.as_str()).collect()
    }

    /// Distinct class labels in order of first appearance.
    pub fn classes(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.label) {
                out.push(r.label.clone());
            }
        }
        out
    }

    /// Records at `indices`, in that order, over the same alphabet.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let records = indices.iter().map(|&i| self.records[i].clone()).collect();
        Dataset::new(self.alphabet.clone(), records)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text)?;
        let alphabet = Alphabet::from_names(&file.alphabet)?;
        let records = file
            .records
            .into_iter()
            .map(|r| {
                Ok(Record {
                    tree: parse_tree(&r.tree, &alphabet)?,
                    label: r.label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(alphabet, records)
    }

    pub fn to_json(&self) -> String {
        let file = DatasetFile {
            alphabet: self
                .alphabet
                .symbols()
                .iter()
                .map(|s| s.to_string())
                .collect(),
            records: self
                .records
                .iter()
                .map(|r| RecordFile {
                    tree: serialize_tree(&r.tree),
                    label: r.label.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("dataset serializes")
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_json(&text)
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, dataset.to_json()).map_err(|e| Error::io(path, e))
}

//! Authentication schemes as structured alphabets.
//!
//! A [`Scheme`] owns a finite table of composite symbols. Every symbol carries
//! one component per [`MatchGroup`] (key + modifier for textual passwords,
//! figure + color + square for chess passwords) and belongs to exactly one
//! [`EntropyCategory`]. Wire-format passwords are decoded into a
//! [`PasswordSeq`] of symbol ids through the scheme's [`Codec`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("scheme definition parse error: {0}")]
    Parse(String),
    #[error("invalid scheme `{scheme}`: {invariant}")]
    Invariant { scheme: String, invariant: String },
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("scheme `{scheme}` has no match group `{group}`")]
    UnknownGroup { scheme: String, group: String },
    #[error("cannot read scheme file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("unknown character {ch:?} at position {pos}")]
    UnknownChar { ch: char, pos: usize },
    #[error("malformed token {token:?} at position {pos}: {reason}")]
    MalformedToken {
        token: String,
        pos: usize,
        reason: String,
    },
    #[error("unknown token {token:?} at position {pos}")]
    UnknownToken { token: String, pos: usize },
    #[error("list index {index} out of range 0..{size} at position {pos}")]
    IndexOutOfRange {
        index: String,
        size: usize,
        pos: usize,
    },
    #[error("sequence belongs to scheme `{found}`, expected `{expected}`")]
    SchemeMismatch { expected: String, found: String },
}

/// Wire-format rule used to turn password text into symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Codec {
    /// Raw printable string, one character per symbol via a keyboard layout.
    TextualLayout,
    /// Space-separated tokens of `:`-joined component labels.
    TokenList,
    /// Space-separated words resolved against per-column lists, or `#k` indices.
    IndexedList,
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Codec::TextualLayout => "textual-layout",
            Codec::TokenList => "token-list",
            Codec::IndexedList => "indexed-list",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolId(pub u32);

/// Scheme file document. This is also what `surfbench schemes --show` prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeDefinition {
    pub id: String,
    pub pool_size: u64,
    pub codec: Codec,
    pub match_groups: Vec<GroupDefinition>,
    pub entropy_categories: Vec<CategoryDefinition>,
    /// Character to component labels (one per match group), textual-layout only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<BTreeMap<String, Vec<String>>>,
    /// Order of the `:`-separated fields in a token-list token, by group name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_order: Option<Vec<String>>,
    /// Word columns for indexed-list; position `i` resolves against column `i % columns`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lists: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDefinition {
    pub name: String,
    pub size: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryDefinition {
    pub name: String,
    /// Wire tokens of the member symbols. Omitted means "every symbol not
    /// claimed by another category".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchGroup {
    pub name: String,
    pub size: u32,
    values: Vec<String>,
}

impl MatchGroup {
    /// Labels of the component values that occur in the symbol table.
    pub fn values(&self) -> &[String] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyCategory {
    pub name: String,
    members: Vec<SymbolId>,
}

impl EntropyCategory {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[SymbolId] {
        &self.members
    }
}

/// A decoded password: an ordered list of symbols of one scheme.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PasswordSeq {
    pub scheme_id: String,
    pub symbols: Vec<SymbolId>,
}

impl PasswordSeq {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Raw symbol ids, used by the unadjusted metrics.
    pub fn ids(&self) -> Vec<u32> {
        self.symbols.iter().map(|s| s.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMode {
    Original,
    Guess,
}

#[derive(Debug, Clone)]
pub struct Scheme {
    pub id: String,
    pub pool_size: u64,
    pub codec: Codec,
    match_groups: Vec<MatchGroup>,
    entropy_categories: Vec<EntropyCategory>,
    components: Vec<Vec<u32>>,
    category_of: Vec<usize>,
    wire_of: Vec<String>,
    by_wire: HashMap<String, SymbolId>,
    by_components: HashMap<Vec<u32>, SymbolId>,
    token_order: Vec<usize>,
    lists: Vec<Vec<String>>,
    definition: SchemeDefinition,
}

pub const PRESET_IDS: [&str; 3] = ["textual", "gcps", "assoc-list"];

impl Scheme {
    /// Parses and validates a JSON scheme document.
    pub fn load(definition_text: &str) -> Result<Scheme, SchemeError> {
        let def: SchemeDefinition =
            serde_json::from_str(definition_text).map_err(|e| SchemeError::Parse(e.to_string()))?;
        Scheme::from_definition(def)
    }

    pub fn load_file(path: &Path) -> Result<Scheme, SchemeError> {
        let text = std::fs::read_to_string(path).map_err(|source| SchemeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scheme::load(&text).map_err(|e| match e {
            SchemeError::Parse(msg) => SchemeError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// One of the built-in schemes: `textual`, `gcps` or `assoc-list`.
    pub fn preset(id: &str) -> Result<Scheme, SchemeError> {
        let def = match id {
            "textual" => crate::presets::textual(),
            "gcps" => crate::presets::gcps(),
            "assoc-list" => crate::presets::assoc_list(),
            other => return Err(SchemeError::UnknownScheme(other.to_string())),
        };
        Scheme::from_definition(def)
    }

    pub fn from_definition(def: SchemeDefinition) -> Result<Scheme, SchemeError> {
        let id = def.id.clone();
        let fail = |invariant: String| SchemeError::Invariant {
            scheme: id.clone(),
            invariant,
        };

        if def.id.trim().is_empty() {
            return Err(fail("id must be non-empty".into()));
        }
        if def.pool_size < 2 {
            return Err(fail(format!(
                "pool_size must be >= 2, got {}",
                def.pool_size
            )));
        }
        if def.match_groups.is_empty() {
            return Err(fail("match_groups must be non-empty".into()));
        }
        let mut seen = HashSet::new();
        for g in &def.match_groups {
            if !seen.insert(g.name.as_str()) {
                return Err(fail(format!("duplicate match group name `{}`", g.name)));
            }
            if g.size == 0 {
                return Err(fail(format!("match group `{}` has size 0", g.name)));
            }
            if let Some(values) = &g.values {
                if values.len() > g.size as usize {
                    return Err(fail(format!(
                        "match group `{}` lists {} values but has size {}",
                        g.name,
                        values.len(),
                        g.size
                    )));
                }
                let distinct: HashSet<_> = values.iter().collect();
                if distinct.len() != values.len() {
                    return Err(fail(format!(
                        "match group `{}` has duplicate values",
                        g.name
                    )));
                }
            }
        }
        if def.match_groups.iter().all(|g| g.size < 2) {
            return Err(fail("at least one match group must have size >= 2".into()));
        }

        let mut groups: Vec<MatchGroup> = def
            .match_groups
            .iter()
            .map(|g| MatchGroup {
                name: g.name.clone(),
                size: g.size,
                values: g.values.clone().unwrap_or_default(),
            })
            .collect();

        let mut components: Vec<Vec<u32>> = Vec::new();
        let mut wire_of: Vec<String> = Vec::new();
        let mut token_order: Vec<usize> = (0..groups.len()).collect();
        let mut lists = Vec::new();

        match def.codec {
            Codec::TextualLayout => {
                let layout = def
                    .layout
                    .as_ref()
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| {
                        fail("textual-layout codec requires a non-empty `layout`".into())
                    })?;
                for (ch, comps) in layout {
                    if ch.chars().count() != 1 {
                        return Err(fail(format!(
                            "layout key {ch:?} must be a single character"
                        )));
                    }
                    if comps.len() != groups.len() {
                        return Err(fail(format!(
                            "layout entry {ch:?} has {} components, expected one per match group ({})",
                            comps.len(),
                            groups.len()
                        )));
                    }
                    let mut sym = Vec::with_capacity(groups.len());
                    for (group, label) in groups.iter_mut().zip(comps) {
                        let fixed = def
                            .match_groups
                            .iter()
                            .find(|g| g.name == group.name)
                            .and_then(|g| g.values.as_ref())
                            .is_some();
                        let idx = match group.values.iter().position(|v| v == label) {
                            Some(i) => i,
                            None if fixed => {
                                return Err(fail(format!(
                                    "layout entry {ch:?} uses value {label:?} not listed for group `{}`",
                                    group.name
                                )))
                            }
                            None => {
                                group.values.push(label.clone());
                                group.values.len() - 1
                            }
                        };
                        if idx >= group.size as usize {
                            return Err(fail(format!(
                                "match group `{}` needs more than {} distinct values",
                                group.name, group.size
                            )));
                        }
                        sym.push(idx as u32);
                    }
                    components.push(sym);
                    wire_of.push(ch.clone());
                }
            }
            Codec::TokenList => {
                for g in &groups {
                    if g.values.is_empty() {
                        return Err(fail(format!(
                            "token-list codec requires `values` for match group `{}`",
                            g.name
                        )));
                    }
                    if g.values
                        .iter()
                        .any(|v| v.is_empty() || v.contains(':') || v.contains(' '))
                    {
                        return Err(fail(format!(
                            "values of match group `{}` must be non-empty and contain no ':' or ' '",
                            g.name
                        )));
                    }
                }
                if let Some(order) = &def.token_order {
                    let mut resolved = Vec::with_capacity(order.len());
                    for name in order {
                        let idx = groups.iter().position(|g| &g.name == name).ok_or_else(|| {
                            fail(format!("token_order names unknown group `{name}`"))
                        })?;
                        resolved.push(idx);
                    }
                    let mut sorted = resolved.clone();
                    sorted.sort_unstable();
                    if sorted != (0..groups.len()).collect::<Vec<_>>() {
                        return Err(fail(
                            "token_order must name every match group exactly once".into(),
                        ));
                    }
                    token_order = resolved;
                }
                let sizes: Vec<u32> = groups.iter().map(|g| g.values.len() as u32).collect();
                let total: u64 = sizes.iter().map(|&s| s as u64).product();
                if total > 1 << 24 {
                    return Err(fail(format!(
                        "symbol table of {total} symbols is too large"
                    )));
                }
                let mut current = vec![0u32; groups.len()];
                for _ in 0..total {
                    let wire = token_order
                        .iter()
                        .map(|&gi| groups[gi].values[current[gi] as usize].as_str())
                        .collect::<Vec<_>>()
                        .join(":");
                    components.push(current.clone());
                    wire_of.push(wire);
                    // odometer, last group fastest
                    for gi in (0..groups.len()).rev() {
                        current[gi] += 1;
                        if current[gi] < sizes[gi] {
                            break;
                        }
                        current[gi] = 0;
                    }
                }
            }
            Codec::IndexedList => {
                if groups.len() != 1 {
                    return Err(fail(
                        "indexed-list codec requires exactly one match group".into(),
                    ));
                }
                let size = groups[0].size as usize;
                if groups[0].values.is_empty() {
                    groups[0].values = (0..size).map(|k| k.to_string()).collect();
                }
                if let Some(cols) = &def.lists {
                    if cols.is_empty() {
                        return Err(fail("`lists` must contain at least one column".into()));
                    }
                    for (c, col) in cols.iter().enumerate() {
                        if col.len() != size {
                            return Err(fail(format!(
                                "list column {c} has {} words, expected {size}",
                                col.len()
                            )));
                        }
                        let distinct: HashSet<_> = col.iter().collect();
                        if distinct.len() != col.len() {
                            return Err(fail(format!("list column {c} has duplicate words")));
                        }
                        if col.iter().any(|w| {
                            w.is_empty() || w.contains(char::is_whitespace) || w.starts_with('#')
                        }) {
                            return Err(fail(format!(
                                "list column {c} words must be non-empty, without whitespace or leading '#'"
                            )));
                        }
                    }
                    lists = cols.clone();
                }
                for k in 0..groups[0].values.len() {
                    components.push(vec![k as u32]);
                    wire_of.push(format!("#{k}"));
                }
            }
        }

        let mut by_components = HashMap::with_capacity(components.len());
        let mut by_wire = HashMap::with_capacity(components.len());
        for (i, (comp, wire)) in components.iter().zip(&wire_of).enumerate() {
            if by_components
                .insert(comp.clone(), SymbolId(i as u32))
                .is_some()
            {
                return Err(fail(format!(
                    "symbol {wire:?} duplicates the components of another symbol"
                )));
            }
            by_wire.insert(wire.clone(), SymbolId(i as u32));
        }

        // Entropy categories partition the symbol table.
        if def.entropy_categories.is_empty() {
            return Err(fail("entropy_categories must be non-empty".into()));
        }
        let mut category_of = vec![usize::MAX; components.len()];
        let mut categories = Vec::with_capacity(def.entropy_categories.len());
        let mut remainder = None;
        for (ci, cat) in def.entropy_categories.iter().enumerate() {
            let mut members = Vec::new();
            match &cat.members {
                Some(list) => {
                    for token in list {
                        let sym = resolve_member(def.codec, &by_wire, &lists, token).ok_or_else(
                            || {
                                fail(format!(
                                    "entropy category `{}` member {token:?} is not a symbol",
                                    cat.name
                                ))
                            },
                        )?;
                        if category_of[sym.0 as usize] != usize::MAX {
                            return Err(fail(format!(
                                "symbol {token:?} belongs to more than one entropy category"
                            )));
                        }
                        category_of[sym.0 as usize] = ci;
                        members.push(sym);
                    }
                }
                None => {
                    if remainder.replace(ci).is_some() {
                        return Err(fail(
                            "at most one entropy category may omit `members`".into(),
                        ));
                    }
                }
            }
            categories.push(EntropyCategory {
                name: cat.name.clone(),
                members,
            });
        }
        if let Some(ci) = remainder {
            for (s, slot) in category_of.iter_mut().enumerate() {
                if *slot == usize::MAX {
                    *slot = ci;
                    categories[ci].members.push(SymbolId(s as u32));
                }
            }
        }
        if let Some(s) = category_of.iter().position(|&c| c == usize::MAX) {
            return Err(fail(format!(
                "symbol {:?} is not in any entropy category",
                wire_of[s]
            )));
        }
        for cat in &mut categories {
            cat.members.sort_unstable();
        }
        let category_total: u64 = categories.iter().map(|c| c.size() as u64).sum();
        if category_total != def.pool_size {
            return Err(fail(format!(
                "entropy category sizes sum to {category_total}, expected pool_size {}",
                def.pool_size
            )));
        }

        Ok(Scheme {
            id: def.id.clone(),
            pool_size: def.pool_size,
            codec: def.codec,
            match_groups: groups,
            entropy_categories: categories,
            components,
            category_of,
            wire_of,
            by_wire,
            by_components,
            token_order,
            lists,
            definition: def,
        })
    }

    pub fn definition(&self) -> &SchemeDefinition {
        &self.definition
    }

    pub fn match_groups(&self) -> &[MatchGroup] {
        &self.match_groups
    }

    pub fn entropy_categories(&self) -> &[EntropyCategory] {
        &self.entropy_categories
    }

    pub fn symbol_count(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self, sym: SymbolId) -> &[u32] {
        &self.components[sym.0 as usize]
    }

    pub fn symbol_from_components(&self, comps: &[u32]) -> Option<SymbolId> {
        self.by_components.get(comps).copied()
    }

    pub fn category_of(&self, sym: SymbolId) -> usize {
        self.category_of[sym.0 as usize]
    }

    pub fn group_index(&self, name: &str) -> Result<usize, SchemeError> {
        self.match_groups
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| SchemeError::UnknownGroup {
                scheme: self.id.clone(),
                group: name.to_string(),
            })
    }

    pub fn decode(&self, wire: &str) -> Result<PasswordSeq, DecodeError> {
        let symbols = match self.codec {
            Codec::TextualLayout => {
                let mut out = Vec::with_capacity(wire.len());
                let mut buf = [0u8; 4];
                for (pos, ch) in wire.chars().enumerate() {
                    let key: &str = ch.encode_utf8(&mut buf);
                    match self.by_wire.get(key) {
                        Some(&s) => out.push(s),
                        None => return Err(DecodeError::UnknownChar { ch, pos }),
                    }
                }
                out
            }
            Codec::TokenList => {
                if wire.is_empty() {
                    Vec::new()
                } else {
                    wire.split(' ')
                        .enumerate()
                        .map(|(pos, tok)| self.decode_token(pos, tok))
                        .collect::<Result<_, _>>()?
                }
            }
            Codec::IndexedList => {
                if wire.is_empty() {
                    Vec::new()
                } else {
                    wire.split(' ')
                        .enumerate()
                        .map(|(pos, tok)| self.decode_list_item(pos, tok))
                        .collect::<Result<_, _>>()?
                }
            }
        };
        Ok(PasswordSeq {
            scheme_id: self.id.clone(),
            symbols,
        })
    }

    fn decode_token(&self, pos: usize, tok: &str) -> Result<SymbolId, DecodeError> {
        let malformed = |reason: String| DecodeError::MalformedToken {
            token: tok.to_string(),
            pos,
            reason,
        };
        let fields: Vec<&str> = tok.split(':').collect();
        if fields.len() != self.match_groups.len() {
            return Err(malformed(format!(
                "expected {} ':'-separated fields, found {}",
                self.match_groups.len(),
                fields.len()
            )));
        }
        let mut comps = vec![0u32; self.match_groups.len()];
        for (field, &gi) in fields.iter().zip(&self.token_order) {
            let group = &self.match_groups[gi];
            let idx = group
                .values
                .iter()
                .position(|v| v == field)
                .ok_or_else(|| malformed(format!("{field:?} is not a valid {}", group.name)))?;
            comps[gi] = idx as u32;
        }
        self.symbol_from_components(&comps)
            .ok_or_else(|| DecodeError::UnknownToken {
                token: tok.to_string(),
                pos,
            })
    }

    fn decode_list_item(&self, pos: usize, tok: &str) -> Result<SymbolId, DecodeError> {
        let size = self.components.len();
        if let Some(digits) = tok.strip_prefix('#') {
            return match digits.parse::<usize>() {
                Ok(k) if k < size && !digits.starts_with('+') => Ok(SymbolId(k as u32)),
                _ => Err(DecodeError::IndexOutOfRange {
                    index: digits.to_string(),
                    size,
                    pos,
                }),
            };
        }
        if self.lists.is_empty() {
            return Err(DecodeError::UnknownToken {
                token: tok.to_string(),
                pos,
            });
        }
        let column = &self.lists[pos % self.lists.len()];
        column
            .iter()
            .position(|w| w == tok)
            .map(|k| SymbolId(k as u32))
            .ok_or_else(|| DecodeError::UnknownToken {
                token: tok.to_string(),
                pos,
            })
    }

    /// Canonical wire text of a sequence. Inverse of [`Scheme::decode`] for
    /// canonical inputs.
    pub fn encode(&self, seq: &PasswordSeq) -> String {
        match self.codec {
            Codec::TextualLayout => seq
                .symbols
                .iter()
                .map(|s| self.wire_of[s.0 as usize].as_str())
                .collect(),
            Codec::TokenList => seq
                .symbols
                .iter()
                .map(|s| self.wire_of[s.0 as usize].as_str())
                .collect::<Vec<_>>()
                .join(" "),
            Codec::IndexedList => seq
                .symbols
                .iter()
                .enumerate()
                .map(|(pos, s)| {
                    if self.lists.is_empty() {
                        self.wire_of[s.0 as usize].clone()
                    } else {
                        self.lists[pos % self.lists.len()][s.0 as usize].clone()
                    }
                })
                .collect::<Vec<_>>()
                .join(" "),
        }
    }

    /// Wire text of a single symbol outside any position context.
    pub fn symbol_wire(&self, sym: SymbolId) -> &str {
        &self.wire_of[sym.0 as usize]
    }

    /// Component sequence of `seq` for the named match group.
    pub fn project(&self, seq: &PasswordSeq, group: &str) -> Result<Vec<u32>, SchemeError> {
        let gi = self.group_index(group)?;
        Ok(self.project_index(seq, gi))
    }

    pub fn project_index(&self, seq: &PasswordSeq, group: usize) -> Vec<u32> {
        seq.symbols
            .iter()
            .map(|s| self.components[s.0 as usize][group])
            .collect()
    }

    /// Component labels of `seq` for the named match group.
    pub fn project_labels(&self, seq: &PasswordSeq, group: &str) -> Result<Vec<&str>, SchemeError> {
        let gi = self.group_index(group)?;
        let values = &self.match_groups[gi].values;
        Ok(self
            .project_index(seq, gi)
            .into_iter()
            .map(|c| values[c as usize].as_str())
            .collect())
    }

    /// Sum of the sizes of the entropy categories that `seq` draws from.
    pub fn effective_pool(&self, seq: &PasswordSeq) -> u64 {
        if self.entropy_categories.len() == 1 {
            return self.pool_size;
        }
        let mut present = vec![false; self.entropy_categories.len()];
        for s in &seq.symbols {
            present[self.category_of(*s)] = true;
        }
        present
            .iter()
            .zip(&self.entropy_categories)
            .filter(|(p, _)| **p)
            .map(|(_, c)| c.size() as u64)
            .sum()
    }

    /// Guess pool judged against an original: the full pool minus the
    /// categories the original uses but the guess never touches.
    pub fn guess_pool_against(&self, original: &PasswordSeq, guess: &PasswordSeq) -> u64 {
        if self.entropy_categories.len() == 1 {
            return self.pool_size;
        }
        let mut in_original = vec![false; self.entropy_categories.len()];
        let mut in_guess = vec![false; self.entropy_categories.len()];
        for s in &original.symbols {
            in_original[self.category_of(*s)] = true;
        }
        for s in &guess.symbols {
            in_guess[self.category_of(*s)] = true;
        }
        let missing: u64 = self
            .entropy_categories
            .iter()
            .enumerate()
            .filter(|(i, _)| in_original[*i] && !in_guess[*i])
            .map(|(_, c)| c.size() as u64)
            .sum();
        self.pool_size - missing
    }

    /// Pool size used for the entropy of `seq` under `mode`.
    pub fn entropy_pool(&self, seq: &PasswordSeq, mode: EntropyMode) -> u64 {
        match mode {
            EntropyMode::Original => self.pool_size,
            EntropyMode::Guess => self.effective_pool(seq),
        }
    }

    /// `l * log2(p)` with `p` the full pool for originals and the pool of the
    /// represented categories for guesses.
    pub fn entropy_bits(&self, seq: &PasswordSeq, mode: EntropyMode) -> f64 {
        if seq.is_empty() {
            return 0.0;
        }
        let pool = self.entropy_pool(seq, mode);
        seq.len() as f64 * (pool as f64).log2()
    }

    pub(crate) fn check_seq(&self, seq: &PasswordSeq) -> Result<(), DecodeError> {
        if seq.scheme_id != self.id {
            return Err(DecodeError::SchemeMismatch {
                expected: self.id.clone(),
                found: seq.scheme_id.clone(),
            });
        }
        Ok(())
    }
}

fn resolve_member(
    codec: Codec,
    by_wire: &HashMap<String, SymbolId>,
    lists: &[Vec<String>],
    token: &str,
) -> Option<SymbolId> {
    if let Some(&s) = by_wire.get(token) {
        return Some(s);
    }
    if codec == Codec::IndexedList {
        return lists
            .iter()
            .find_map(|col| col.iter().position(|w| w == token))
            .map(|k| SymbolId(k as u32));
    }
    None
}

/// Collection of loaded schemes keyed by id.
#[derive(Debug, Clone, Default)]
pub struct SchemeRegistry {
    schemes: BTreeMap<String, Scheme>,
}

impl SchemeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The three built-in presets.
    pub fn with_presets() -> Self {
        let mut reg = Self::new();
        for id in PRESET_IDS {
            reg.insert(Scheme::preset(id).expect("built-in preset is valid"));
        }
        reg
    }

    /// Presets plus every `*.json` scheme file in `dir`. Files override presets
    /// with the same id.
    pub fn with_dir(dir: &Path) -> Result<Self, SchemeError> {
        let mut reg = Self::with_presets();
        let entries = std::fs::read_dir(dir).map_err(|source| SchemeError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in paths {
            reg.insert(Scheme::load_file(&p)?);
        }
        Ok(reg)
    }

    pub fn insert(&mut self, scheme: Scheme) {
        self.schemes.insert(scheme.id.clone(), scheme);
    }

    pub fn get(&self, id: &str) -> Option<&Scheme> {
        self.schemes.get(id)
    }

    pub fn require(&self, id: &str) -> Result<&Scheme, SchemeError> {
        self.get(id)
            .ok_or_else(|| SchemeError::UnknownScheme(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.schemes.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Scheme> {
        self.schemes.values()
    }
}

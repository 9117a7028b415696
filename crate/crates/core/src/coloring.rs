//! Colors, list assignments and (partial) colorings, plus their JSON forms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::Vertex;

/// Interned color. Ids follow the lexicographic order of the color names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColorId(pub u32);

impl ColorId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColoringError {
    #[error("vertex key {0:?} is not a vertex id")]
    BadVertexKey(String),
    #[error("vertex {vertex} out of range (num_vertices = {num_vertices})")]
    VertexOutOfRange { vertex: Vertex, num_vertices: usize },
    #[error("unknown color {0:?}")]
    UnknownColor(String),
    #[error("bad provenance {0:?}")]
    BadProvenance(String),
}

/// Bidirectional map between color names and ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColorNames {
    names: Vec<String>,
    ids: HashMap<String, ColorId>,
}

impl ColorNames {
    /// Interns the given names; ids are assigned in sorted name order.
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sorted: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        let names: Vec<String> = sorted.into_iter().collect();
        let ids = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), ColorId(i as u32)))
            .collect();
        Self { names, ids }
    }

    /// `count` colors named `c0, c1, ...`. Zero-padded so that name order
    /// and numeric order agree.
    pub fn numbered(count: usize) -> Self {
        let width = count.saturating_sub(1).to_string().len();
        Self::new((0..count).map(|i| format!("c{i:0width$}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<ColorId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: ColorId) -> &str {
        &self.names[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = ColorId> {
        (0..self.names.len() as u32).map(ColorId)
    }
}

impl Serialize for ColorNames {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.names.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ColorNames {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(deserializer)?;
        if names.windows(2).any(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom("color names must be sorted and distinct"));
        }
        Ok(Self::new(names))
    }
}

/// A color list L(v) for every vertex; each list is sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListAssignment {
    lists: Vec<Vec<ColorId>>,
    names: ColorNames,
}

/// `{"lists": {"<vertex>": ["c1", ...]}}`
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListsFile {
    pub lists: BTreeMap<String, Vec<String>>,
}

impl ListAssignment {
    pub fn new(lists: Vec<Vec<ColorId>>, names: ColorNames) -> Self {
        let lists = lists
            .into_iter()
            .map(|mut l| {
                l.sort_unstable();
                l.dedup();
                l
            })
            .collect();
        Self { lists, names }
    }

    /// Every vertex gets the same full list.
    pub fn uniform(num_vertices: usize, names: ColorNames) -> Self {
        let all: Vec<ColorId> = names.ids().collect();
        Self {
            lists: vec![all; num_vertices],
            names,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.lists.len()
    }

    pub fn list(&self, v: Vertex) -> &[ColorId] {
        &self.lists[v]
    }

    pub fn names(&self) -> &ColorNames {
        &self.names
    }

    pub fn num_colors(&self) -> usize {
        self.names.len()
    }

    pub fn min_list_size(&self) -> usize {
        self.lists.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn contains(&self, v: Vertex, c: ColorId) -> bool {
        self.lists[v].binary_search(&c).is_ok()
    }

    /// Vertices absent from the file get an empty list.
    pub fn from_file(file: &ListsFile, num_vertices: usize) -> Result<Self, ColoringError> {
        let names = ColorNames::new(file.lists.values().flatten().cloned());
        let mut lists = vec![Vec::new(); num_vertices];
        for (key, colors) in &file.lists {
            let v = parse_vertex(key, num_vertices)?;
            lists[v] = colors.iter().map(|c| names.id(c).expect("interned above")).collect();
        }
        Ok(Self::new(lists, names))
    }

    pub fn to_file(&self) -> ListsFile {
        ListsFile {
            lists: self
                .lists
                .iter()
                .enumerate()
                .map(|(v, l)| {
                    (
                        v.to_string(),
                        l.iter().map(|&c| self.names.name(c).to_string()).collect(),
                    )
                })
                .collect(),
        }
    }
}

fn parse_vertex(key: &str, num_vertices: usize) -> Result<Vertex, ColoringError> {
    let v: Vertex = key.parse().map_err(|_| ColoringError::BadVertexKey(key.to_string()))?;
    if v >= num_vertices {
        return Err(ColoringError::VertexOutOfRange {
            vertex: v,
            num_vertices,
        });
    }
    Ok(v)
}

/// Where a vertex's color came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Permanently colored in the given round of the iterative phase.
    Nibble(usize),
    Completion,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Nibble(r) => write!(f, "nibble:{r}"),
            Provenance::Completion => write!(f, "completion"),
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = ColoringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "completion" {
            return Ok(Provenance::Completion);
        }
        s.strip_prefix("nibble:")
            .and_then(|r| r.parse().ok())
            .map(Provenance::Nibble)
            .ok_or_else(|| ColoringError::BadProvenance(s.to_string()))
    }
}

/// Partial or total map vertex → color, with provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<Option<ColorId>>,
    provenance: Vec<Option<Provenance>>,
}

/// `{"colors": {"<vertex>": "<color>"}, "provenance": {"<vertex>": "nibble:<round>" | "completion"}}`
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringFile {
    pub colors: BTreeMap<String, String>,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

impl Coloring {
    pub fn uncolored(num_vertices: usize) -> Self {
        Self {
            colors: vec![None; num_vertices],
            provenance: vec![None; num_vertices],
        }
    }

    /// A total coloring without provenance.
    pub fn from_colors<I: IntoIterator<Item = ColorId>>(colors: I) -> Self {
        let colors: Vec<Option<ColorId>> = colors.into_iter().map(Some).collect();
        let provenance = vec![None; colors.len()];
        Self { colors, provenance }
    }

    pub fn num_vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn get(&self, v: Vertex) -> Option<ColorId> {
        self.colors[v]
    }

    pub fn provenance(&self, v: Vertex) -> Option<Provenance> {
        self.provenance[v]
    }

    pub fn set(&mut self, v: Vertex, c: ColorId, from: Provenance) {
        self.colors[v] = Some(c);
        self.provenance[v] = Some(from);
    }

    pub fn clear(&mut self, v: Vertex) {
        self.colors[v] = None;
        self.provenance[v] = None;
    }

    pub fn is_total(&self) -> bool {
        self.colors.iter().all(Option::is_some)
    }

    pub fn colored_count(&self) -> usize {
        self.colors.iter().filter(|c| c.is_some()).count()
    }

    pub fn uncolored_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.colors
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .map(|(v, _)| v)
    }

    pub fn as_slice(&self) -> &[Option<ColorId>] {
        &self.colors
    }

    pub fn to_file(&self, names: &ColorNames) -> ColoringFile {
        let mut file = ColoringFile::default();
        for (v, c) in self.colors.iter().enumerate() {
            if let Some(c) = c {
                file.colors.insert(v.to_string(), names.name(*c).to_string());
            }
            if let Some(p) = self.provenance[v] {
                file.provenance.insert(v.to_string(), p.to_string());
            }
        }
        file
    }

    /// Reads a coloring, resolving names through `names`.
    pub fn from_file(file: &ColoringFile, num_vertices: usize, names: &ColorNames) -> Result<Self, ColoringError> {
        let mut coloring = Self::uncolored(num_vertices);
        for (key, name) in &file.colors {
            let v = parse_vertex(key, num_vertices)?;
            let c = names
                .id(name)
                .ok_or_else(|| ColoringError::UnknownColor(name.clone()))?;
            coloring.colors[v] = Some(c);
        }
        for (key, p) in &file.provenance {
            let v = parse_vertex(key, num_vertices)?;
            coloring.provenance[v] = Some(p.parse()?);
        }
        Ok(coloring)
    }
}

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use hypernibble::{ColorNames, Hypergraph, InstanceFile, ListAssignment, ListsFile};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_instance(path: &Path, allow_dup: bool) -> Result<Hypergraph> {
    let file: InstanceFile = read_json(path)?;
    Hypergraph::from_instance(file, allow_dup).with_context(|| format!("invalid instance {}", path.display()))
}

pub fn read_lists(path: &Path, num_vertices: usize) -> Result<ListAssignment> {
    let file: ListsFile = read_json(path)?;
    ListAssignment::from_file(&file, num_vertices).with_context(|| format!("invalid lists {}", path.display()))
}

/// Every vertex gets the colors `c0..c{count-1}`.
pub fn uniform_lists(num_vertices: usize, count: usize) -> ListAssignment {
    ListAssignment::uniform(num_vertices, ColorNames::numbered(count))
}

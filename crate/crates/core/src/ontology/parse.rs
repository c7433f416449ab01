//! Readers for the Princeton WordNet database files and the tab-separated
//! fixture format, plus the fixture writer.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{OntologyError, OntologyGraph, Pos, RelationType, Synset, SynsetId};

struct RawSynset {
    lemmas: Vec<String>,
    gloss: String,
    relations: Vec<(RelationType, SynsetId)>,
}

struct IndexRef {
    source_name: String,
    line: usize,
    target: SynsetId,
}

/// Accumulates synsets from one or more sources, then resolves pointers and
/// freezes everything into an [`OntologyGraph`].
#[derive(Default)]
pub struct OntologyBuilder {
    synsets: BTreeMap<SynsetId, RawSynset>,
    index_refs: Vec<IndexRef>,
    exceptions: HashMap<Pos, HashMap<String, Vec<String>>>,
}

/// Lowercased, trimmed, with spaces joined by underscores.
pub fn normalize_surface(s: &str) -> String {
    s.trim().to_lowercase().replace(' ', "_")
}

fn strip_adj_marker(word: &str) -> &str {
    for marker in ["(a)", "(p)", "(ip)"] {
        if let Some(stripped) = word.strip_suffix(marker) {
            return stripped;
        }
    }
    word
}

fn push_unique(list: &mut Vec<String>, value: String) {
    if !list.contains(&value) {
        list.push(value);
    }
}

impl OntologyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn insert(&mut self, id: SynsetId, raw: RawSynset) -> Result<(), OntologyError> {
        if self.synsets.insert(id, raw).is_some() {
            return Err(OntologyError::DuplicateOffset(id));
        }
        Ok(())
    }

    /// Reads a `data.{pos}` file. License header lines (leading two spaces)
    /// and blank lines are skipped.
    pub fn read_data<R: BufRead>(
        &mut self,
        reader: R,
        source_name: &str,
    ) -> Result<&mut Self, OntologyError> {
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            let (id, raw) = parse_data_line(&line)
                .map_err(|reason| OntologyError::malformed(source_name, lineno, reason))?;
            self.insert(id, raw)?;
        }
        Ok(self)
    }

    /// Reads an `index.{pos}` file. Entries are cross-checked against the
    /// loaded synsets when the graph is built.
    pub fn read_index<R: BufRead>(
        &mut self,
        reader: R,
        source_name: &str,
    ) -> Result<&mut Self, OntologyError> {
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            let targets = parse_index_line(&line)
                .map_err(|reason| OntologyError::malformed(source_name, lineno, reason))?;
            self.index_refs
                .extend(targets.into_iter().map(|target| IndexRef {
                    source_name: source_name.to_string(),
                    line: lineno,
                    target,
                }));
        }
        Ok(self)
    }

    /// Reads a morphological exception list (`noun.exc` layout).
    pub fn read_exceptions<R: BufRead>(
        &mut self,
        pos: Pos,
        reader: R,
        source_name: &str,
    ) -> Result<&mut Self, OntologyError> {
        let table = self.exceptions.entry(pos).or_default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(form) = fields.next() else { continue };
            let bases: Vec<String> = fields.map(normalize_surface).collect();
            if bases.is_empty() {
                return Err(OntologyError::malformed(
                    source_name,
                    i + 1,
                    "exception entry without base form",
                ));
            }
            let entry = table.entry(normalize_surface(form)).or_default();
            for base in bases {
                push_unique(entry, base);
            }
        }
        Ok(self)
    }

    /// Reads the tab-separated fixture format:
    /// `<id> TAB <lemmas,...> TAB <gloss> TAB <relation:target;...>`.
    pub fn read_simple_graph<R: BufRead>(
        &mut self,
        reader: R,
        source_name: &str,
    ) -> Result<&mut Self, OntologyError> {
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, raw) = parse_simple_line(&line)
                .map_err(|reason| OntologyError::malformed(source_name, lineno, reason))?;
            self.insert(id, raw)?;
        }
        Ok(self)
    }

    /// Resolves pointers, adds missing inverse relations, and builds the
    /// lemma index. The first unresolved pointer is reported.
    pub fn build(self) -> Result<OntologyGraph, OntologyError> {
        for index_ref in &self.index_refs {
            if !self.synsets.contains_key(&index_ref.target) {
                return Err(OntologyError::malformed(
                    &index_ref.source_name,
                    index_ref.line,
                    format!("index entry references unknown synset {}", index_ref.target),
                ));
            }
        }

        let mut edges: BTreeMap<SynsetId, BTreeSet<(RelationType, SynsetId)>> = BTreeMap::new();
        for (&id, raw) in &self.synsets {
            for &(rel, target) in &raw.relations {
                if !self.synsets.contains_key(&target) {
                    return Err(OntologyError::DanglingPointer {
                        source_id: id,
                        target,
                    });
                }
                if target == id {
                    continue;
                }
                edges.entry(id).or_default().insert((rel, target));
                edges.entry(target).or_default().insert((rel.inverse(), id));
            }
        }

        let positions: HashMap<SynsetId, u32> = self
            .synsets
            .keys()
            .enumerate()
            .map(|(i, &id)| (id, i as u32))
            .collect();

        let mut synsets = Vec::with_capacity(self.synsets.len());
        let mut adjacency = Vec::with_capacity(self.synsets.len());
        let mut lemma_index: HashMap<String, Vec<SynsetId>> = HashMap::new();
        for (id, raw) in self.synsets {
            let relations: Vec<(RelationType, SynsetId)> = edges
                .remove(&id)
                .map(|set| set.into_iter().collect())
                .unwrap_or_default();
            adjacency.push(
                relations
                    .iter()
                    .map(|&(rel, target)| (rel, positions[&target]))
                    .collect(),
            );
            for lemma in &raw.lemmas {
                // synsets are visited in (pos, offset) order, so lists stay sorted
                lemma_index.entry(lemma.clone()).or_default().push(id);
            }
            synsets.push(Synset {
                id,
                lemmas: raw.lemmas,
                gloss: raw.gloss,
                relations,
            });
        }

        Ok(OntologyGraph {
            synsets,
            positions,
            adjacency,
            lemma_index,
            exceptions: self.exceptions,
        })
    }
}

fn parse_data_line(line: &str) -> Result<(SynsetId, RawSynset), String> {
    let (body, gloss) = match line.split_once('|') {
        Some((body, gloss)) => (body, gloss.trim()),
        None => (line, ""),
    };
    let mut fields = body.split_whitespace();
    let mut next = |what: &str| fields.next().ok_or_else(|| format!("missing {what}"));

    let offset: u32 = next("synset offset")?
        .parse()
        .map_err(|_| "synset offset is not a number".to_string())?;
    next("lexicographer file number")?;
    let ss_type = next("synset type")?;
    let pos = single_char(ss_type)
        .and_then(Pos::from_letter)
        .ok_or_else(|| format!("unknown synset type {ss_type:?}"))?;
    let word_count = usize::from_str_radix(next("word count")?, 16)
        .map_err(|_| "word count is not hexadecimal".to_string())?;
    if word_count == 0 {
        return Err("synset without lemmas".into());
    }
    let mut lemmas = Vec::with_capacity(word_count);
    for _ in 0..word_count {
        let word = next("lemma")?;
        next("lex_id")?;
        push_unique(&mut lemmas, normalize_surface(strip_adj_marker(word)));
    }
    let pointer_count: usize = next("pointer count")?
        .parse()
        .map_err(|_| "pointer count is not a number".to_string())?;
    let mut relations = Vec::new();
    for _ in 0..pointer_count {
        let symbol = next("pointer symbol")?;
        let target_offset: u32 = next("pointer offset")?
            .parse()
            .map_err(|_| "pointer offset is not a number".to_string())?;
        let target_pos_field = next("pointer part of speech")?;
        let target_pos = single_char(target_pos_field)
            .and_then(Pos::from_letter)
            .ok_or_else(|| format!("unknown pointer part of speech {target_pos_field:?}"))?;
        next("pointer source/target")?;
        if let Some(rel) = RelationType::from_pointer_symbol(symbol) {
            relations.push((rel, SynsetId::new(target_pos, target_offset)));
        }
    }
    // Verb frames may follow; they are not retained.
    Ok((
        SynsetId::new(pos, offset),
        RawSynset {
            lemmas,
            gloss: gloss.to_string(),
            relations,
        },
    ))
}

fn parse_index_line(line: &str) -> Result<Vec<SynsetId>, String> {
    let mut fields = line.split_whitespace();
    let mut next = |what: &str| fields.next().ok_or_else(|| format!("missing {what}"));
    next("lemma")?;
    let pos_field = next("part of speech")?;
    let pos = single_char(pos_field)
        .and_then(Pos::from_letter)
        .ok_or_else(|| format!("unknown part of speech {pos_field:?}"))?;
    let synset_count: usize = next("synset count")?
        .parse()
        .map_err(|_| "synset count is not a number".to_string())?;
    let pointer_count: usize = next("pointer count")?
        .parse()
        .map_err(|_| "pointer count is not a number".to_string())?;
    for _ in 0..pointer_count {
        next("pointer symbol")?;
    }
    next("sense count")?;
    next("tagged sense count")?;
    (0..synset_count)
        .map(|_| {
            next("synset offset")?
                .parse::<u32>()
                .map(|offset| SynsetId::new(pos, offset))
                .map_err(|_| "synset offset is not a number".to_string())
        })
        .collect()
}

fn parse_simple_line(line: &str) -> Result<(SynsetId, RawSynset), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if !(3..=4).contains(&fields.len()) {
        return Err(format!("expected 4 tab-separated fields, found {}", fields.len()));
    }
    let id: SynsetId = fields[0]
        .trim()
        .parse()
        .map_err(|_| format!("invalid synset id {:?}", fields[0].trim()))?;
    let mut lemmas = Vec::new();
    for lemma in fields[1].split(',').map(normalize_surface) {
        if lemma.is_empty() {
            return Err("empty lemma".into());
        }
        push_unique(&mut lemmas, lemma);
    }
    let mut relations = Vec::new();
    if let Some(rel_field) = fields.get(3) {
        for item in rel_field.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, target) = item
                .split_once(':')
                .ok_or_else(|| format!("relation {item:?} is not name:target"))?;
            let rel = RelationType::from_name(name.trim())
                .ok_or_else(|| format!("unknown relation {:?}", name.trim()))?;
            let target: SynsetId = target
                .trim()
                .parse()
                .map_err(|_| format!("invalid relation target {:?}", target.trim()))?;
            relations.push((rel, target));
        }
    }
    Ok((
        id,
        RawSynset {
            lemmas,
            gloss: fields[2].trim().to_string(),
            relations,
        },
    ))
}

fn single_char(s: &str) -> Option<char> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

/// Parses a whole fixture-format stream into a graph.
pub fn parse_simple_graph<R: BufRead>(reader: R) -> Result<OntologyGraph, OntologyError> {
    let mut builder = OntologyBuilder::new();
    builder.read_simple_graph(reader, "<simple graph>")?;
    builder.build()
}

/// Writes a graph in the fixture format. Only hypernym and holonym edges are
/// written; their inverses are restored on load.
pub fn write_simple_graph<W: Write>(graph: &OntologyGraph, mut out: W) -> std::io::Result<()> {
    for synset in graph.synsets() {
        let relations: Vec<String> = synset
            .relations
            .iter()
            .filter(|(rel, _)| matches!(rel, RelationType::Hypernym | RelationType::Holonym))
            .map(|(rel, target)| format!("{}:{}", rel.name(), target))
            .collect();
        let gloss: String = synset
            .gloss
            .chars()
            .map(|c| if c == '\t' || c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            synset.id,
            synset.lemmas.join(","),
            gloss,
            relations.join(";")
        )?;
    }
    Ok(())
}

impl OntologyGraph {
    /// Loads every `data.*`, `index.*` and `*.exc` file found in a WordNet
    /// `dict` directory. At least one data file must be present.
    pub fn load_wordnet_dir(dir: impl AsRef<Path>) -> Result<OntologyGraph, OntologyError> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(OntologyError::MissingFile(dir.to_path_buf()));
        }
        let mut builder = OntologyBuilder::new();
        let mut found = false;
        for pos in Pos::ALL {
            let suffix = pos.file_suffix();
            let data = dir.join(format!("data.{suffix}"));
            if data.is_file() {
                found = true;
                builder.read_data(BufReader::new(File::open(&data)?), &data.display().to_string())?;
            }
            let index = dir.join(format!("index.{suffix}"));
            if index.is_file() {
                builder.read_index(BufReader::new(File::open(&index)?), &index.display().to_string())?;
            }
            let exc = dir.join(format!("{suffix}.exc"));
            if exc.is_file() {
                builder.read_exceptions(
                    pos,
                    BufReader::new(File::open(&exc)?),
                    &exc.display().to_string(),
                )?;
            }
        }
        if !found {
            return Err(OntologyError::MissingFile(dir.join("data.noun")));
        }
        builder.build()
    }

    pub fn load_simple_graph_file(path: impl AsRef<Path>) -> Result<OntologyGraph, OntologyError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => OntologyError::MissingFile(path.to_path_buf()),
            _ => OntologyError::Io(e),
        })?;
        let mut builder = OntologyBuilder::new();
        builder.read_simple_graph(BufReader::new(file), &path.display().to_string())?;
        builder.build()
    }
}

//! Fixed pretrained word vectors plus cosine similarity and
//! nearest-neighbor search over any embedding collection.
//!
//! The text format is word2vec-style: an optional `count dim` header line,
//! then one `token v1 ... vd` line per vector. Export uses the same format
//! with the header always present.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::exec;
use crate::lexicon::Token;
use crate::{Error, Result, Vector};

/// Immutable token → vector table with a single shared dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    table: HashMap<Token, Vector>,
    duplicates_skipped: usize,
}

impl EmbeddingStore {
    /// Load a text-format vector file. A first line of exactly two integer
    /// fields is treated as a header; otherwise the dimension is inferred
    /// from the first data line. Duplicate tokens keep the first occurrence.
    pub fn load(path: &Path) -> Result<EmbeddingStore> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);

        let mut dim: Option<usize> = None;
        let mut declared_count: Option<usize> = None;
        let mut table: HashMap<Token, Vector> = HashMap::new();
        let mut duplicates = 0usize;

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();

            if line_no == 1 && fields.len() == 2 {
                if let (Ok(count), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>())
                {
                    declared_count = Some(count);
                    dim = Some(d);
                    continue;
                }
            }

            if fields.len() < 2 {
                return Err(Error::parse(path, line_no, "expected token and components"));
            }
            let token = Token::normalize(fields[0])
                .ok_or_else(|| Error::parse(path, line_no, "empty token"))?;
            let mut values = Vec::with_capacity(fields.len() - 1);
            for f in &fields[1..] {
                let v: f64 = f.parse().map_err(|_| {
                    Error::parse(path, line_no, format!("non-numeric component {f:?}"))
                })?;
                values.push(v);
            }

            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("expected {d} components, got {}", values.len()),
                    ));
                }
                _ => {}
            }

            if table.contains_key(&token) {
                log::warn!(
                    "{}:{line_no}: duplicate token {token}; keeping first occurrence",
                    path.display()
                );
                duplicates += 1;
                continue;
            }
            table.insert(token, Vector::from_vec(values));
        }

        let dim = dim.filter(|_| !table.is_empty()).ok_or_else(|| {
            Error::parse(path, 1, "no vector data in file")
        })?;
        if let Some(count) = declared_count {
            if count != table.len() + duplicates {
                log::warn!(
                    "{}: header declares {count} vectors, file has {}",
                    path.display(),
                    table.len() + duplicates
                );
            }
        }

        Ok(EmbeddingStore {
            dim,
            table,
            duplicates_skipped: duplicates,
        })
    }

    /// Build a store directly, checking that all vectors share `dim`.
    pub fn from_pairs(dim: usize, pairs: Vec<(Token, Vector)>) -> Result<EmbeddingStore> {
        let mut table = HashMap::with_capacity(pairs.len());
        for (token, v) in pairs {
            if v.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            table.entry(token).or_insert(v);
        }
        Ok(EmbeddingStore {
            dim,
            table,
            duplicates_skipped: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn duplicates_skipped(&self) -> usize {
        self.duplicates_skipped
    }

    pub fn get(&self, token: &Token) -> Option<&Vector> {
        self.table.get(token)
    }

    pub fn contains(&self, token: &Token) -> bool {
        self.table.contains_key(token)
    }

    /// Iterate in arbitrary order. Callers that need determinism sort.
    pub fn iter(&self) -> impl Iterator<Item = (&Token, &Vector)> {
        self.table.iter()
    }
}

/// Cosine similarity. Zero if either vector has zero norm; that convention
/// keeps losses finite for degenerate initializations.
pub fn cosine(u: &Vector, v: &Vector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    Ok(cosine_unchecked(u, v))
}

/// Cosine without the dimension check, for hot paths where dimensions are
/// structurally equal.
pub(crate) fn cosine_unchecked(u: &Vector, v: &Vector) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let nu = u.dot(u).sqrt();
    let nv = v.dot(v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    u.dot(v) / (nu * nv)
}

/// Top-`k` ids by cosine with `query`, descending, ties broken by
/// lexicographic id, excluded ids filtered out. The scan parallelizes; the
/// final order is the deterministic merged order.
pub fn nearest<'a, I>(
    collection: I,
    query: &Vector,
    k: usize,
    exclude: &HashSet<String>,
) -> Vec<(String, f64)>
where
    I: IntoIterator<Item = (&'a str, &'a Vector)>,
{
    if k == 0 {
        return Vec::new();
    }
    let items: Vec<(&str, &Vector)> = collection
        .into_iter()
        .filter(|(id, _)| !exclude.contains(*id))
        .collect();
    let mut scored: Vec<(String, f64)> = exec::map(&items, |(id, v)| {
        let s = cosine_unchecked(query, v);
        // canonicalize -0.0 so ordering is stable
        (id.to_string(), if s == 0.0 { 0.0 } else { s })
    });
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Write a collection in the text format (with header), one line per id,
/// in the order given.
pub fn write_vectors<'a, W, I>(writer: &mut W, dim: usize, items: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a Vector)>,
{
    let items: Vec<(&str, &Vector)> = items.into_iter().collect();
    let mut w = BufWriter::new(writer);
    writeln!(w, "{} {}", items.len(), dim)?;
    for (id, v) in items {
        write!(w, "{id}")?;
        for x in v.iter() {
            write!(w, " {x}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

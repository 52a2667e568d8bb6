//! Index file: magic bytes, a length-prefixed JSON header, then a
//! little-endian binary body of documents and postings.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Bm25Params, DocEntry, Index};
use crate::error::{Error, Result};
use crate::label::LoeLabel;
use crate::textproc::Tokenizer;

pub const INDEX_MAGIC: &[u8; 8] = b"LOEIDX01";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    params: Bm25Params,
    n_docs: usize,
    n_terms: usize,
    n_postings: usize,
    tokenizer: Tokenizer,
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    put_u32(buf, s.len() as u32);
    buf.extend_from_slice(s.as_bytes());
}

/// Serializes to bytes; equal indexes give equal bytes.
pub fn encode(index: &Index) -> Result<Vec<u8>> {
    let header = Header {
        format_version: FORMAT_VERSION,
        params: index.params,
        n_docs: index.docs.len(),
        n_terms: index.terms.len(),
        n_postings: index.postings.iter().map(Vec::len).sum(),
        tokenizer: index.tokenizer.clone(),
    };
    let header = serde_json::to_vec(&header)?;
    let mut buf = Vec::new();
    buf.extend_from_slice(INDEX_MAGIC);
    put_u32(&mut buf, header.len() as u32);
    buf.extend_from_slice(&header);
    for d in &index.docs {
        put_str(&mut buf, &d.doc_id);
        put_str(&mut buf, &d.title);
        put_str(&mut buf, &d.snippet);
        buf.push(d.loe.ordinal() as u8);
        put_u32(&mut buf, d.length);
    }
    for (term, list) in index.terms.iter().zip(&index.postings) {
        put_str(&mut buf, term);
        put_u32(&mut buf, list.len() as u32);
        for &(doc, tf) in list {
            put_u32(&mut buf, doc);
            put_u32(&mut buf, tf);
        }
    }
    Ok(buf)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

fn corrupt(what: &str) -> Error {
    Error::IndexFormat(format!("truncated or corrupt index ({what})"))
}

impl Cursor<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| corrupt(what))?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)? as usize;
        let b = self.take(n, what)?;
        String::from_utf8(b.to_vec()).map_err(|_| corrupt(what))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Index> {
    let mut c = Cursor { bytes, at: 0 };
    if c.take(8, "magic")? != INDEX_MAGIC {
        return Err(Error::IndexFormat("not an index file (bad magic bytes)".into()));
    }
    let header_len = c.u32("header length")? as usize;
    let header: Header = serde_json::from_slice(c.take(header_len, "header")?)
        .map_err(|e| Error::IndexFormat(format!("bad header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::IndexFormat(format!(
            "unsupported index version {}",
            header.format_version
        )));
    }
    header.params.validate()?;
    let mut docs = Vec::with_capacity(header.n_docs.min(1 << 20));
    for _ in 0..header.n_docs {
        let doc_id = c.string("doc id")?;
        let title = c.string("title")?;
        let snippet = c.string("snippet")?;
        let loe = LoeLabel::from_ordinal(c.take(1, "level")?[0] as usize).ok_or_else(|| corrupt("level"))?;
        let length = c.u32("length")?;
        docs.push(DocEntry {
            doc_id,
            title,
            snippet,
            loe,
            length,
        });
    }
    if docs.windows(2).any(|w| w[0].doc_id >= w[1].doc_id) {
        return Err(corrupt("document order"));
    }
    let mut terms = Vec::with_capacity(header.n_terms.min(1 << 22));
    let mut postings = Vec::with_capacity(header.n_terms.min(1 << 22));
    for _ in 0..header.n_terms {
        terms.push(c.string("term")?);
        let n = c.u32("posting count")? as usize;
        let mut list = Vec::with_capacity(n.min(docs.len()));
        for _ in 0..n {
            let doc = c.u32("posting")?;
            let tf = c.u32("posting")?;
            if doc as usize >= docs.len() || list.last().is_some_and(|&(p, _): &(u32, u32)| p >= doc) {
                return Err(corrupt("posting order"));
            }
            list.push((doc, tf));
        }
        postings.push(list);
    }
    if c.at != bytes.len() {
        return Err(corrupt("trailing bytes"));
    }
    Ok(Index::assemble(header.params, header.tokenizer, docs, terms, postings))
}

pub fn save_index(index: &Index, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(index)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_index(path: impl AsRef<Path>) -> Result<Index> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file).read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::index::build_index;

    fn sample() -> Index {
        let docs = vec![
            Document::new("p2", "Cohort of adults", "A prospective cohort.").with_assigned(LoeLabel::L2b),
            Document::new("p1", "Trial", "Randomized controlled trial of aspirin.").with_assigned(LoeLabel::L1b),
        ];
        build_index(&docs, Bm25Params::default()).unwrap()
    }

    #[test]
    fn roundtrip_is_exact() {
        let idx = sample();
        let bytes = encode(&idx).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back, idx);
        assert_eq!(encode(&back).unwrap(), bytes);
        assert_eq!(encode(&sample()).unwrap(), bytes);
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.idx");
        save_index(&sample(), &path).unwrap();
        assert_eq!(load_index(&path).unwrap(), sample());
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let bytes = encode(&sample()).unwrap();
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(b"NOTANIDX").is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(&extra).is_err());
        for cut in [0, 7, 12, 40] {
            assert!(decode(&bytes[..cut]).is_err());
        }
    }
}

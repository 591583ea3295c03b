//! Line-based text format: a header `m N`, then one `x y z` line per point.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{enumerate, LatticePoint, LatticeSet};
use crate::{Error, Result};

pub fn write_lattice<W: Write>(set: &LatticeSet, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", set.m(), set.len())?;
    for p in set {
        writeln!(out, "{} {} {}", p.0[0], p.0[1], p.0[2])?;
    }
    Ok(())
}

/// Parses the text format. `path` is only used in error messages.
pub fn read_lattice<R: BufRead>(input: R, path: &Path) -> Result<LatticeSet> {
    let bad = |reason: String| Error::Parse { path: path.to_path_buf(), reason };
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| bad("missing header".into()))??;
    let head: Vec<u64> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| bad(format!("header: {e}")))?;
    let [m, n] = head[..] else {
        return Err(bad(format!("header should be `m N`, got {header:?}")));
    };
    let mut points = Vec::with_capacity(n as usize);
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let c: Vec<i64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("line {}: {e}", k + 2)))?;
        let [x, y, z] = c[..] else {
            return Err(bad(format!("line {}: expected three integers", k + 2)));
        };
        points.push(LatticePoint([x, y, z]));
    }
    if points.len() as u64 != n {
        return Err(bad(format!("header says {n} points, found {}", points.len())));
    }
    let set = LatticeSet::from_points(m, points).map_err(|e| bad(e.to_string()))?;
    if set.len() as u64 != n {
        return Err(bad("duplicate points".into()));
    }
    Ok(set)
}

/// On-disk memo of lattice sets keyed by `m`. A hit returns exactly what
/// [`enumerate`] would.
#[derive(Clone, Debug)]
pub struct LatticeCache {
    dir: PathBuf,
}

impl LatticeCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(LatticeCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, m: u64) -> PathBuf {
        self.dir.join(format!("lattice_{m}.txt"))
    }

    pub fn get(&self, m: u64) -> Result<LatticeSet> {
        let path = self.path_for(m);
        if let Ok(file) = fs::File::open(&path) {
            return read_lattice(BufReader::new(file), &path);
        }
        let set = enumerate(m);
        // Write to a temporary name first so concurrent readers never see a
        // partial file.
        let tmp = self.dir.join(format!(".lattice_{m}.{}.tmp", std::process::id()));
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            write_lattice(&set, &mut w)?;
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for m in [1, 3, 7, 26, 101] {
            let set = enumerate(m);
            let mut buf = Vec::new();
            write_lattice(&set, &mut buf).unwrap();
            let back = read_lattice(&buf[..], Path::new("mem")).unwrap();
            assert_eq!(back, set);
        }
        let text = String::from_utf8({
            let mut b = Vec::new();
            write_lattice(&enumerate(1), &mut b).unwrap();
            b
        })
        .unwrap();
        assert!(text.starts_with("1 6\n-1 0 0\n"));
    }

    #[test]
    fn rejects_malformed() {
        let p = Path::new("mem");
        assert!(read_lattice(&b"3 2\n1 1 1\n"[..], p).is_err());
        assert!(read_lattice(&b"3 1\n1 1 2\n"[..], p).is_err());
        assert!(read_lattice(&b"3\n"[..], p).is_err());
        assert!(read_lattice(&b"3 2\n1 1 1\n1 1 1\n"[..], p).is_err());
        assert!(read_lattice(&b""[..], p).is_err());
    }

    #[test]
    fn cache_is_a_pure_memo() {
        let dir = tempfile::tempdir().unwrap();
        let cache = LatticeCache::new(dir.path()).unwrap();
        let first = cache.get(29).unwrap();
        assert!(cache.path_for(29).exists());
        let second = cache.get(29).unwrap();
        assert_eq!(first, second);
        assert_eq!(first, enumerate(29));
    }
}

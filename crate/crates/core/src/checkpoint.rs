//! Parameter checkpoints.
//!
//! Layout: a UTF-8 text manifest followed by raw little-endian `f32` data.
//!
//! ```text
//! agegan-checkpoint v1
//! params 2
//! gen_xy.conv0.weight 32x3x7x7 0
//! gen_xy.conv0.bias 32 18816
//! data 18944
//! <18944 bytes>
//! ```
//!
//! Offsets are byte offsets into the data section. Values are always stored
//! as `f32`, whatever scalar the sets use in memory.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::param::ParamSet;
use crate::scalar::Scalar;

const MAGIC: &str = "agegan-checkpoint v1";

struct Entry {
    shape: Vec<usize>,
    offset: usize,
}

pub fn save_checkpoint<T: Scalar>(path: impl AsRef<Path>, sets: &[&ParamSet<T>]) -> Result<()> {
    let mut header = format!("{MAGIC}\n");
    let total: usize = sets.iter().map(|s| s.len()).sum();
    header.push_str(&format!("params {total}\n"));
    let mut data = Vec::new();
    let mut seen = HashMap::new();
    for set in sets {
        for p in set.iter() {
            if seen.insert(p.name.clone(), ()).is_some() {
                return Err(CoreError::Checkpoint(format!(
                    "parameter name {:?} appears in more than one set",
                    p.name
                )));
            }
            let dims: Vec<String> = p.value.shape().iter().map(|d| d.to_string()).collect();
            header.push_str(&format!("{} {} {}\n", p.name, dims.join("x"), data.len()));
            for v in p.value.data() {
                data.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes());
            }
        }
    }
    header.push_str(&format!("data {}\n", data.len()));
    let mut file = fs::File::create(path)?;
    file.write_all(header.as_bytes())?;
    file.write_all(&data)?;
    Ok(())
}

pub fn load_checkpoint<T: Scalar>(path: impl AsRef<Path>, sets: &mut [&mut ParamSet<T>]) -> Result<()> {
    let path = path.as_ref();
    let mut reader = BufReader::new(fs::File::open(path)?);
    let bad = |msg: String| CoreError::Checkpoint(format!("{}: {msg}", path.display()));

    let mut line = String::new();
    let mut next_line = |reader: &mut BufReader<fs::File>| -> Result<String> {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(bad("unexpected end of manifest".into()));
        }
        Ok(line.trim_end_matches('\n').to_string())
    };

    if next_line(&mut reader)? != MAGIC {
        return Err(bad("missing checkpoint magic".into()));
    }
    let count_line = next_line(&mut reader)?;
    let count: usize = count_line
        .strip_prefix("params ")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| bad(format!("malformed count line {count_line:?}")))?;

    let mut entries: HashMap<String, Entry> = HashMap::with_capacity(count);
    for _ in 0..count {
        let row = next_line(&mut reader)?;
        let fields: Vec<&str> = row.split(' ').collect();
        let [name, dims, offset] = fields[..] else {
            return Err(bad(format!("malformed entry {row:?}")));
        };
        let shape = dims
            .split('x')
            .map(|d| d.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad(format!("malformed shape in {row:?}")))?;
        let offset = offset
            .parse()
            .map_err(|_| bad(format!("malformed offset in {row:?}")))?;
        if entries.insert(name.to_string(), Entry { shape, offset }).is_some() {
            return Err(bad(format!("duplicate entry {name:?}")));
        }
    }
    let data_line = next_line(&mut reader)?;
    let data_len: usize = data_line
        .strip_prefix("data ")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| bad(format!("malformed data line {data_line:?}")))?;
    let mut data = vec![0u8; data_len];
    reader.read_exact(&mut data)?;

    let mut claimed = 0;
    for set in sets.iter() {
        for p in set.iter() {
            let entry = entries
                .get(&p.name)
                .ok_or_else(|| bad(format!("missing parameter {:?}", p.name)))?;
            if entry.shape != p.value.shape() {
                return Err(bad(format!(
                    "shape of {:?} is {:?} in file, network expects {:?}",
                    p.name,
                    entry.shape,
                    p.value.shape()
                )));
            }
            let end = entry.offset + 4 * p.value.numel();
            if end > data.len() {
                return Err(bad(format!("data for {:?} runs past the end", p.name)));
            }
            claimed += 1;
        }
    }
    if claimed != entries.len() {
        let known: std::collections::HashSet<&str> = sets
            .iter()
            .flat_map(|s| s.iter().map(|p| p.name.as_str()))
            .collect();
        let mut unknown: Vec<&String> = entries.keys().filter(|k| !known.contains(k.as_str())).collect();
        unknown.sort();
        return Err(bad(format!("unknown parameters {unknown:?}")));
    }

    for set in sets.iter_mut() {
        for p in set.iter_mut() {
            let entry = &entries[&p.name];
            for (i, v) in p.value.data_mut().iter_mut().enumerate() {
                let at = entry.offset + 4 * i;
                let bytes: [u8; 4] = data[at..at + 4].try_into().expect("4 bytes");
                *v = T::from_f64_lossy(f32::from_le_bytes(bytes) as f64);
            }
        }
    }
    Ok(())
}

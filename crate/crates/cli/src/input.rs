use std::path::Path;

use paulipriv_core::algebra::{AlgebraJson, Channel, ChannelJson, OperatorAlgebra};
use paulipriv_core::dense::{DenseOperator, OperatorJson};
use paulipriv_core::group::{parse_class_list, PauliSubgroup};
use paulipriv_core::Error;
use serde::de::DeserializeOwned;

use crate::output::{CliError, CliResult};
use crate::GroupInput;

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Json(path.to_path_buf(), e))
}

pub fn operator(path: &Path) -> CliResult<DenseOperator> {
    let j: OperatorJson = read_json(path)?;
    Ok(DenseOperator::try_from(&j)?)
}

pub fn channel_file(path: &Path) -> CliResult<Channel> {
    let j: ChannelJson = read_json(path)?;
    Ok(Channel::from_json(&j)?)
}

/// Generators inline, or a subgroup file.
pub fn subgroup(g: &GroupInput) -> CliResult<PauliSubgroup> {
    if let Some(path) = &g.input {
        // the file header fixes d and n
        return Ok(PauliSubgroup::from_file_string(&read_text(path)?)?);
    }
    let text = g.gens.as_deref().ok_or_else(|| CliError::Usage("give --gens or --in".into()))?;
    generators(text, g.d, g.n)
}

pub fn generators(text: &str, d: u32, n: Option<usize>) -> CliResult<PauliSubgroup> {
    let classes = parse_class_list(text, d)?;
    let n = match (n, classes.first()) {
        (Some(n), _) => n,
        (None, Some(c)) => c.n(),
        (None, None) => 1,
    };
    if let Some(c) = classes.iter().find(|c| c.n() != n) {
        return Err(Error::Mismatch(format!("{c} has {} sites, expected {n}", c.n())).into());
    }
    Ok(PauliSubgroup::close(d, n, &classes)?)
}

/// Matrix size an algebra name fixes on its own, if any.
pub fn algebra_size(name: &str, d: u32, n: Option<usize>) -> CliResult<Option<usize>> {
    if let Some(rest) = name.strip_prefix("delta") {
        return Ok(Some(rest.parse().map_err(|_| Error::Parse(format!("bad size in {name:?}")))?));
    }
    if name == "scalars" || name == "full" {
        return Ok(n.map(|n| (d as usize).pow(n as u32)));
    }
    if name.starts_with('@') {
        return Ok(None);
    }
    let k = generators(name, d, n)?;
    Ok(Some((d as usize).pow(k.n() as u32)))
}

/// `delta<N>`, `scalars`, `full`, a Pauli generator list, or `@file.json`.
/// `size` is used by `scalars` and `full` when `--n` is absent.
pub fn algebra(name: &str, d: u32, n: Option<usize>, size: Option<usize>) -> CliResult<OperatorAlgebra> {
    if let Some(path) = name.strip_prefix('@') {
        let j: AlgebraJson = read_json(Path::new(path))?;
        return Ok(OperatorAlgebra::from_json(&j)?);
    }
    if let Some(rest) = name.strip_prefix("delta") {
        let m: usize = rest.parse().map_err(|_| Error::Parse(format!("bad size in {name:?}")))?;
        if m == 0 {
            return Err(Error::Invalid("delta0 is empty".into()).into());
        }
        return Ok(OperatorAlgebra::diagonal(m));
    }
    if name == "scalars" || name == "full" {
        let m = n.map(|n| (d as usize).pow(n as u32)).or(size).ok_or_else(|| {
            CliError::Usage(format!("{name} needs --n or another operand that fixes the size"))
        })?;
        return Ok(if name == "scalars" { OperatorAlgebra::scalars(m) } else { OperatorAlgebra::full(m) });
    }
    let k = generators(name, d, n)?;
    Ok(OperatorAlgebra::from_pauli_subgroup(&k))
}

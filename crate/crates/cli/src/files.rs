//! On-disk JSON formats for problems and gains.
//!
//! Matrices are row-major nested arrays. An empty matrix may be written as
//! `[]` whatever its column count; shapes are checked against the
//! dimensions implied by the rest of the file.

use serde::{Deserialize, Serialize};
use teamlmi::lift::DynamicProblem;
use teamlmi::linalg::{self, Mat};
use teamlmi::{BlockGain, GammaFormProblem, Partition, TeamProblem};

use crate::CliError;

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub m: Vec<usize>,
    pub p: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamFile {
    pub kind: String,
    pub partition: PartitionFile,
    #[serde(rename = "Qww")]
    pub qww: Rows,
    #[serde(rename = "Qwu")]
    pub qwu: Rows,
    #[serde(rename = "Quu")]
    pub quu: Rows,
    #[serde(rename = "D")]
    pub d: Rows,
    #[serde(rename = "E")]
    pub e: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaFormFile {
    pub kind: String,
    pub partition: PartitionFile,
    #[serde(rename = "Q")]
    pub q_form: Rows,
    #[serde(rename = "R")]
    pub r_form: Rows,
    pub q: usize,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageCostFile {
    #[serde(rename = "Qxx")]
    pub qxx: Rows,
    #[serde(rename = "Qxu")]
    pub qxu: Rows,
    #[serde(rename = "Quu")]
    pub quu: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicFile {
    pub kind: String,
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Vec<Rows>,
    /// Per-player input sizes; may be omitted when every player has one input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
    pub stage_cost: StageCostFile,
    pub horizon: usize,
    pub include_initial_state: bool,
}

/// A parsed and validated problem of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Team(TeamProblem),
    GammaForm(GammaFormProblem),
    Dynamic(DynamicProblem),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Team(_) => "team",
            Problem::GammaForm(_) => "gamma_form",
            Problem::Dynamic(_) => "dynamic",
        }
    }

    /// Static team form, lifting a dynamic problem if needed.
    pub fn team(&self) -> Result<Option<TeamProblem>, CliError> {
        match self {
            Problem::Team(t) => Ok(Some(t.clone())),
            Problem::GammaForm(_) => Ok(None),
            Problem::Dynamic(d) => teamlmi::lift_dynamic(d)
                .map(Some)
                .map_err(|e| CliError::Input(format!("lifting failed: {e}"))),
        }
    }

    pub fn gamma_form(&self) -> Result<GammaFormProblem, CliError> {
        match self {
            Problem::GammaForm(g) => Ok(g.clone()),
            _ => Ok(self.team()?.expect("team or dynamic").to_gamma_form()),
        }
    }

    pub fn partition(&self) -> Result<Partition, CliError> {
        Ok(self.gamma_form()?.partition)
    }
}

pub fn mat_rows(a: &Mat) -> Rows {
    (0..a.nrows()).map(|r| a.row(r).iter().copied().collect()).collect()
}

/// Convert nested rows to a matrix of the expected shape.
pub fn to_mat(field: &str, rows: &Rows, nrows: usize, ncols: usize) -> Result<Mat, CliError> {
    if rows.is_empty() && (nrows == 0 || ncols == 0) {
        return Ok(Mat::zeros(nrows, ncols));
    }
    if rows.len() != nrows {
        return Err(CliError::Input(format!(
            "field `{field}`: expected {nrows} rows, got {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(CliError::Input(format!(
                "field `{field}`: row {i} has {} entries, expected {ncols}",
                row.len()
            )));
        }
    }
    Ok(Mat::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

/// Row count and a consistent column count, for matrices whose shape is
/// not implied elsewhere.
fn shape_of(field: &str, rows: &Rows) -> Result<(usize, usize), CliError> {
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(CliError::Input(format!(
            "field `{field}`: row {i} has {} entries, row 0 has {cols}",
            rows[i].len()
        )));
    }
    Ok((rows.len(), cols))
}

fn partition_of(p: &PartitionFile) -> Result<Partition, CliError> {
    Partition::new(p.m.clone(), p.p.clone()).map_err(|e| CliError::Input(format!("field `partition`: {e}")))
}

fn partition_file(p: &Partition) -> PartitionFile {
    PartitionFile {
        m: p.m_sizes().to_vec(),
        p: p.p_sizes().to_vec(),
    }
}

fn json_error(source: &str, e: serde_json::Error) -> CliError {
    CliError::Input(format!("{source}: {e}"))
}

#[derive(Deserialize)]
struct KindOnly {
    kind: Option<String>,
}

/// Parse a problem file. `source` names the input in diagnostics.
pub fn parse_problem(text: &str, source: &str) -> Result<Problem, CliError> {
    let head: KindOnly = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
    let kind = head
        .kind
        .ok_or_else(|| CliError::Input(format!("{source}: missing field `kind`")))?;
    let wrap = |e: CliError| match e {
        CliError::Input(msg) => CliError::Input(format!("{source}: {msg}")),
        other => other,
    };
    match kind.as_str() {
        "team" => {
            let f: TeamFile = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
            team_from_file(&f).map(Problem::Team).map_err(wrap)
        }
        "gamma_form" => {
            let f: GammaFormFile = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
            gamma_form_from_file(&f).map(Problem::GammaForm).map_err(wrap)
        }
        "dynamic" => {
            let f: DynamicFile = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
            dynamic_from_file(&f).map(Problem::Dynamic).map_err(wrap)
        }
        other => Err(CliError::Input(format!(
            "{source}: field `kind`: unknown kind {other:?}, expected \"team\", \"gamma_form\" or \"dynamic\""
        ))),
    }
}

pub fn team_from_file(f: &TeamFile) -> Result<TeamProblem, CliError> {
    let part = partition_of(&f.partition)?;
    let (m, p) = (part.m(), part.p());
    let (q, _) = shape_of("Qww", &f.qww)?;
    let prob = TeamProblem::new(
        to_mat("Qww", &f.qww, q, q)?,
        to_mat("Qwu", &f.qwu, q, m)?,
        to_mat("Quu", &f.quu, m, m)?,
        to_mat("D", &f.d, p, m)?,
        to_mat("E", &f.e, p, q)?,
        part,
    )?;
    Ok(prob)
}

pub fn gamma_form_from_file(f: &GammaFormFile) -> Result<GammaFormProblem, CliError> {
    let part = partition_of(&f.partition)?;
    if f.p != part.p() {
        return Err(CliError::Input(format!(
            "field `p`: {} but the partition has {} measurements",
            f.p,
            part.p()
        )));
    }
    let s = f.q + f.p + part.m();
    let prob = GammaFormProblem::new(
        to_mat("Q", &f.q_form, s, s)?,
        to_mat("R", &f.r_form, s, s)?,
        f.q,
        part,
    )?;
    Ok(prob)
}

pub fn dynamic_from_file(f: &DynamicFile) -> Result<DynamicProblem, CliError> {
    let (nx, _) = shape_of("A", &f.a)?;
    let a = to_mat("A", &f.a, nx, nx)?;
    let (_, mu) = shape_of("B", &f.b)?;
    let b = to_mat("B", &f.b, nx, mu)?;
    let mut c = Vec::with_capacity(f.c.len());
    for (i, ci) in f.c.iter().enumerate() {
        let name = format!("C[{i}]");
        let (pi, _) = shape_of(&name, ci)?;
        c.push(to_mat(&name, ci, pi, nx)?);
    }
    let input_sizes = match &f.m {
        Some(m) => m.clone(),
        None if c.len() == mu => vec![1; mu],
        None if c.len() == 1 => vec![mu],
        None => {
            return Err(CliError::Input(format!(
                "field `m`: required when {} players share {mu} input columns",
                c.len()
            )))
        }
    };
    let qxx = to_mat("stage_cost.Qxx", &f.stage_cost.qxx, nx, nx)?;
    let qxu = to_mat("stage_cost.Qxu", &f.stage_cost.qxu, nx, mu)?;
    let quu = to_mat("stage_cost.Quu", &f.stage_cost.quu, mu, mu)?;
    let mut s = Mat::zeros(nx + mu, nx + mu);
    linalg::put_block(&mut s, 0, 0, &qxx);
    linalg::put_block(&mut s, 0, nx, &qxu);
    linalg::put_block(&mut s, nx, 0, &qxu.transpose());
    linalg::put_block(&mut s, nx, nx, &quu);
    DynamicProblem::new(a, b, c, input_sizes, s, f.horizon, f.include_initial_state)
        .map_err(|e| CliError::Input(e.to_string()))
}

pub fn team_file(p: &TeamProblem) -> TeamFile {
    TeamFile {
        kind: "team".into(),
        partition: partition_file(&p.partition),
        qww: mat_rows(&p.qww),
        qwu: mat_rows(&p.qwu),
        quu: mat_rows(&p.quu),
        d: mat_rows(&p.d),
        e: mat_rows(&p.e),
    }
}

pub fn gamma_form_file(p: &GammaFormProblem) -> GammaFormFile {
    GammaFormFile {
        kind: "gamma_form".into(),
        partition: partition_file(&p.partition),
        q_form: mat_rows(&p.q_form),
        r_form: mat_rows(&p.r_form),
        q: p.q,
        p: p.p(),
    }
}

pub fn dynamic_file(p: &DynamicProblem) -> DynamicFile {
    let (nx, mu) = (p.state_dim(), p.input_dim());
    let all_scalar = p.input_sizes.iter().all(|&m| m == 1);
    DynamicFile {
        kind: "dynamic".into(),
        a: mat_rows(&p.a),
        b: mat_rows(&p.b),
        c: p.c.iter().map(mat_rows).collect(),
        m: (!all_scalar).then(|| p.input_sizes.clone()),
        stage_cost: StageCostFile {
            qxx: mat_rows(&linalg::block(&p.stage_cost, 0, 0, nx, nx)),
            qxu: mat_rows(&linalg::block(&p.stage_cost, 0, nx, nx, mu)),
            quu: mat_rows(&linalg::block(&p.stage_cost, nx, nx, mu, mu)),
        },
        horizon: p.horizon,
        include_initial_state: p.include_initial_state,
    }
}

pub fn serialize_problem(p: &Problem) -> String {
    match p {
        Problem::Team(t) => pretty_json(&team_file(t)),
        Problem::GammaForm(g) => pretty_json(&gamma_form_file(g)),
        Problem::Dynamic(d) => pretty_json(&dynamic_file(d)),
    }
}

/// Pretty-printed JSON with every array of scalars kept on one line, so
/// matrices read row by row.
pub fn pretty_json<T: Serialize>(v: &T) -> String {
    let text = serde_json::to_string_pretty(v).expect("plain data");
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'[' {
            if let Some(len) = flat_array_len(&text[i..]) {
                let inner: Vec<&str> = text[i + 1..i + len - 1]
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .collect();
                out.push('[');
                out.push_str(&inner.join(", "));
                out.push(']');
                i += len;
                continue;
            }
        }
        let ch = text[i..].chars().next().expect("in bounds");
        out.push(ch);
        i += ch.len_utf8();
    }
    out
}

/// Byte length of a leading `[...]` that contains no nested arrays,
/// objects or strings.
fn flat_array_len(s: &str) -> Option<usize> {
    for (i, ch) in s.char_indices().skip(1) {
        match ch {
            ']' => return Some(i + 1),
            '[' | '{' | '"' => return None,
            _ => {}
        }
    }
    None
}

/// Gain file: a list of blocks, `{"blocks": [...]}`, or any object with a
/// `gain` field (so a solve report can be fed back to `verify`).
pub fn parse_gain(text: &str, source: &str, partition: &Partition) -> Result<BlockGain, CliError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum GainFile {
        Bare(Vec<Rows>),
        Blocks { blocks: Vec<Rows> },
        Report { gain: Vec<Rows> },
    }
    let parsed: GainFile = serde_json::from_str(text).map_err(|_| {
        CliError::Input(format!(
            "{source}: expected a list of gain blocks, {{\"blocks\": [...]}} or a report with a `gain` field"
        ))
    })?;
    let blocks = match parsed {
        GainFile::Bare(b) | GainFile::Blocks { blocks: b } | GainFile::Report { gain: b } => b,
    };
    if blocks.len() != partition.players() {
        return Err(CliError::Input(format!(
            "{source}: {} gain blocks for {} players",
            blocks.len(),
            partition.players()
        )));
    }
    let mats = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| to_mat(&format!("gain[{i}]"), b, partition.m_sizes()[i], partition.p_sizes()[i]))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(format!("{source}: {e}")))?;
    BlockGain::new(mats, partition).map_err(|e| CliError::Input(format!("{source}: {e}")))
}

pub fn gain_rows(gain: &BlockGain) -> Vec<Rows> {
    gain.blocks().iter().map(mat_rows).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use teamlmi::corpus;

    #[test]
    fn empty_matrices_take_their_shape_from_context() {
        let text = r#"{"kind": "team", "partition": {"m": [1], "p": [1]},
            "Qww": [], "Qwu": [], "Quu": [[1.0]], "D": [[0.5]], "E": []}"#;
        let Problem::Team(t) = parse_problem(text, "inline").unwrap() else { panic!() };
        assert_eq!(t.q(), 0);
        assert_eq!(t.e.shape(), (1, 0));
        assert_eq!(t.gamma_bar().unwrap(), 4.0);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let text = r#"{"kind": "team", "partition": {"m": [1], "p": [1]},
            "Qww": [[1.0]], "Qwu": [[0.0, 1.0]], "Quu": [[1.0]], "D": [[0.5]], "E": [[1.0]]}"#;
        let err = parse_problem(text, "f.json").unwrap_err().to_string();
        assert!(err.contains("f.json") && err.contains("`Qwu`"), "{err}");

        let err = parse_problem("{\"kind\": \"team\",\n \"partition\": 3}", "g.json").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");

        let err = parse_problem(r#"{"kind": "teem"}"#, "h.json").unwrap_err().to_string();
        assert!(err.contains("unknown kind"), "{err}");
    }

    #[test]
    fn gain_formats() {
        let part = Partition::scalar(2).unwrap();
        for text in [
            "[[[-0.3856]], [[0.384]]]",
            r#"{"blocks": [[[-0.3856]], [[0.384]]]}"#,
            r#"{"gamma_star": 0.38, "gain": [[[-0.3856]], [[0.384]]]}"#,
        ] {
            let g = parse_gain(text, "k", &part).unwrap();
            assert_eq!(g.entries(), vec![-0.3856, 0.384]);
        }
        assert!(parse_gain("[[[1.0]]]", "k", &part).is_err());
        assert!(parse_gain("[[[1.0, 2.0]], [[0.0]]]", "k", &part).is_err());
    }

    #[test]
    fn round_trip_all_kinds() {
        for p in [
            Problem::Team(corpus::multistage(3).unwrap()),
            Problem::GammaForm(corpus::witsenhausen(0.1).unwrap()),
            Problem::Dynamic(corpus::multistage_dynamic(3).unwrap()),
        ] {
            let text = serialize_problem(&p);
            assert_eq!(parse_problem(&text, "rt").unwrap(), p);
        }
    }
}

//! Command implementations. Each returns the complete output text, so
//! nothing is written unless the command succeeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C;
use rank1kit_core::ballmodel::{crossratio_ball, stereo};
use rank1kit_core::nilboundary::{crossratio_nil, NilPoint, SpaceConfig};
use rank1kit_core::sl2::{
    default_length_words, length_jacobian, trace_jacobian, triple_words, vogt, Sl2, Sl2Rep, Word,
};
use rank1kit_core::spectrum::{
    conjugacy_distance, held_out_words, lemma1_sequence, pair_crossratio, LengthOracle, ReconstructConfig,
    ReconstructionPlan,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Command, JobConfig};
use crate::error::CliError;
use crate::formats::{
    read_json, read_length_table, to_json, word_letters, BallPointDto, ComplexDto, IsometryDto, NilPointDto, RankDto,
    RepDto, SpaceDto,
};
use crate::verify::{ball_gap, random_loxodromic, rng, VerifyReport};

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "RANK1KIT_THREADS";

/// The bundled two-generator Schottky example.
pub const SCHOTTKY_EXAMPLE: &str = include_str!("../data/schottky.json");

pub fn bundled_schottky() -> Sl2Rep {
    read_json::<RepDto>(SCHOTTKY_EXAMPLE, "bundled example")
        .and_then(|d| d.to_rep())
        .expect("bundled example is valid")
}

/// Complete output of a successful command.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub text: String,
    /// False when `verify` found a failing check; the report is still written.
    pub passed: bool,
}

/// Runs a validated job.
pub fn run(cfg: &JobConfig) -> Result<Output, CliError> {
    cfg.validate()?;
    if cfg.command == Command::Verify {
        let report = VerifyReport::run(cfg.n.unwrap_or(200), cfg.seed);
        return Ok(Output {
            text: report.render(),
            passed: report.passed(),
        });
    }
    let text = match cfg.command {
        Command::Crossratio => crossratio(cfg),
        Command::Project => project(cfg),
        Command::Act => act(cfg),
        Command::Lemma1 => lemma1(cfg),
        Command::Lemma2 => lemma2(cfg),
        Command::Vogt => vogt_cmd(cfg),
        Command::Jacobian => jacobian(cfg),
        Command::Reconstruct => reconstruct(cfg),
        Command::Verify => unreachable!("handled above"),
    }?;
    Ok(Output { text, passed: true })
}

fn read_input(cfg: &JobConfig) -> Result<Option<String>, CliError> {
    cfg.input
        .as_ref()
        .map(|p| std::fs::read_to_string(p).map_err(|e| CliError::field("--input", e)))
        .transpose()
}

fn require_input(cfg: &JobConfig) -> Result<String, CliError> {
    read_input(cfg)?.ok_or_else(|| CliError::field("--input", "required for this command"))
}

#[derive(Deserialize)]
struct PointsInput {
    space: SpaceDto,
    points: Vec<NilPointDto>,
    #[serde(default)]
    isometry: Option<IsometryDto>,
}

fn points_input(cfg: &JobConfig) -> Result<(SpaceConfig, Vec<NilPoint>, Option<IsometryDto>), CliError> {
    let input: PointsInput = read_json(&require_input(cfg)?, "--input")?;
    let config = input.space.to_config()?;
    let points = input
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| p.to_point(config, &format!("points[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((config, points, input.isometry))
}

#[derive(Serialize)]
struct CrossratioOutput {
    nil: f64,
    ball: f64,
}

fn crossratio(cfg: &JobConfig) -> Result<String, CliError> {
    let (_, p, _) = points_input(cfg)?;
    if p.len() != 4 {
        return Err(CliError::field("points", format!("expected 4 points, got {}", p.len())));
    }
    let nil = crossratio_nil(&p[0], &p[1], &p[2], &p[3])?;
    let x: Vec<_> = p.iter().map(stereo).collect();
    let ball = crossratio_ball(&x[0], &x[1], &x[2], &x[3])?;
    Ok(to_json(&CrossratioOutput { nil, ball }))
}

#[derive(Serialize)]
struct ProjectOutput {
    points: Vec<BallPointDto>,
}

fn project(cfg: &JobConfig) -> Result<String, CliError> {
    let (_, p, _) = points_input(cfg)?;
    let points = p.iter().map(|g| BallPointDto::from_point(&stereo(g))).collect();
    Ok(to_json(&ProjectOutput { points }))
}

#[derive(Serialize)]
struct ActOutput {
    nil: Vec<NilPointDto>,
    ball: Vec<BallPointDto>,
    max_equivariance_gap: f64,
}

fn act(cfg: &JobConfig) -> Result<String, CliError> {
    let (config, p, iso) = points_input(cfg)?;
    let iso = iso
        .ok_or_else(|| CliError::field("isometry", "required for act"))?
        .to_isometry(config)?;
    let mut out = ActOutput {
        nil: Vec::new(),
        ball: Vec::new(),
        max_equivariance_gap: 0.0,
    };
    for g in &p {
        let moved = iso.act_nil(g)?;
        let ball = iso.act_ball(&stereo(g))?;
        out.max_equivariance_gap = out.max_equivariance_gap.max(ball_gap(&stereo(&moved), &ball));
        out.nil.push(NilPointDto::from_point(&moved));
        out.ball.push(BallPointDto::from_point(&ball));
    }
    Ok(to_json(&out))
}

fn rep_input(cfg: &JobConfig) -> Result<Option<Sl2Rep>, CliError> {
    read_input(cfg)?
        .map(|text| read_json::<RepDto>(&text, "--input")?.to_rep())
        .transpose()
}

fn lemma1(cfg: &JobConfig) -> Result<String, CliError> {
    let rep = rep_input(cfg)?.unwrap_or_else(bundled_schottky);
    let (a, b) = match cfg.words.as_slice() {
        [] => (Word::generator(1), Word::generator(2)),
        [a, b] => (a.clone(), b.clone()),
        _ => return Err(CliError::field("--words", "lemma1 takes exactly two words")),
    };
    let n = cfg.n.unwrap_or(24);
    let (ma, mb) = (rep.evaluate(&a)?, rep.evaluate(&b)?);
    let cr = pair_crossratio(&ma, &mb)?;
    let seq = lemma1_sequence(&LengthOracle::from_rep(rep), &a, &b, n)?;
    let mut s = String::from("n,seq,crossratio,rel_error\n");
    for (i, v) in seq.iter().enumerate() {
        let _ = writeln!(s, "{},{v:e},{cr:e},{:e}", i + 1, (v - cr).abs() / cr);
    }
    Ok(s)
}

#[derive(Deserialize)]
struct MatricesInput {
    matrices: Vec<[ComplexDto; 4]>,
}

fn lemma2(cfg: &JobConfig) -> Result<String, CliError> {
    let matrices = match read_input(cfg)? {
        Some(text) => read_json::<MatricesInput>(&text, "--input")?
            .matrices
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let [a, b, c, d] = e.map(C::from);
                Sl2::new(a, b, c, d).map_err(|err| CliError::field(format!("matrices[{i}]"), err))
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => {
            let mut r = rng(cfg.seed);
            (0..cfg.n.unwrap_or(1000)).map(|_| random_loxodromic(&mut r)).collect()
        }
    };
    let mut s = String::from("trace_re,trace_im,length,gauge,expected,rel_error\n");
    for (i, m) in matrices.iter().enumerate() {
        let l = m.length().map_err(|e| CliError::field(format!("matrices[{i}]"), e))?;
        let t = m.trace();
        let gauge = m.length_gauge();
        let expected = 2.0 * ((l / 2.0).exp() + (-l / 2.0).exp());
        let _ = writeln!(
            s,
            "{:e},{:e},{l:e},{gauge:e},{expected:e},{:e}",
            t.re,
            t.im,
            (gauge - expected).abs() / expected
        );
    }
    Ok(s)
}

#[derive(Deserialize)]
struct VogtInput {
    x1: ComplexDto,
    x2: ComplexDto,
    x3: ComplexDto,
    y12: ComplexDto,
    y13: ComplexDto,
    y23: ComplexDto,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct VogtOutput {
    P: ComplexDto,
    Q: ComplexDto,
    Delta: ComplexDto,
    roots: [ComplexDto; 2],
}

fn vogt_cmd(cfg: &JobConfig) -> Result<String, CliError> {
    let t: VogtInput = read_json(&require_input(cfg)?, "--input")?;
    let v = vogt(
        t.x1.into(),
        t.x2.into(),
        t.x3.into(),
        t.y12.into(),
        t.y13.into(),
        t.y23.into(),
    );
    Ok(to_json(&VogtOutput {
        P: v.p.into(),
        Q: v.q.into(),
        Delta: v.delta.into(),
        roots: v.roots.map(ComplexDto::from),
    }))
}

#[derive(Serialize)]
struct JacobianOutput {
    words: Vec<Vec<i32>>,
    trace: RankDto,
    length: Option<RankDto>,
    length_error: Option<String>,
}

fn jacobian(cfg: &JobConfig) -> Result<String, CliError> {
    let rep = rep_input(cfg)?.ok_or_else(|| CliError::field("--input", "required for this command"))?;
    let words = if !cfg.words.is_empty() {
        cfg.words.clone()
    } else {
        match rep.arity() {
            2 => default_length_words(),
            3 => triple_words(),
            a => return Err(CliError::field("--words", format!("no default word set for arity {a}"))),
        }
    };
    for (i, w) in words.iter().enumerate() {
        rep.check_word(w)
            .map_err(|e| CliError::field(format!("--words[{i}]"), e))?;
    }
    let tj = trace_jacobian(&rep, &words)?;
    let (length, length_error) = match length_jacobian(&rep, &words) {
        Ok(lj) => (Some(RankDto::new(&lj.rank, lj.matrix.ncols())), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(to_json(&JacobianOutput {
        words: words.iter().map(word_letters).collect(),
        trace: RankDto::new(&tj.rank, tj.matrix.ncols()),
        length,
        length_error,
    }))
}

/// Thread pool sized by [`THREADS_VAR`] when set.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::field(THREADS_VAR, "must be a positive integer"))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::field(THREADS_VAR, e))
}

#[derive(Serialize)]
struct WordFit {
    word: Vec<i32>,
    target: f64,
    fitted: f64,
}

#[derive(Serialize)]
struct Estimate {
    value: f64,
    confidence: f64,
}

#[derive(Serialize)]
struct ReconstructOutput {
    parameters: Vec<f64>,
    representation: RepDto,
    residual_rms: f64,
    best_restart: usize,
    restart_rms: Vec<f64>,
    crossratio_estimates: Vec<Estimate>,
    fit: Vec<WordFit>,
    held_out: Vec<WordFit>,
    conjugacy_distance: Option<f64>,
}

fn reconstruct(cfg: &JobConfig) -> Result<String, CliError> {
    let is_csv = cfg
        .input
        .as_deref()
        .and_then(Path::extension)
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let (oracle, reference) = if is_csv {
        let file =
            std::fs::File::open(cfg.input.as_ref().expect("csv input")).map_err(|e| CliError::field("--input", e))?;
        let table: BTreeMap<Word, f64> = read_length_table(file)?;
        (LengthOracle::from_table(table)?, None)
    } else {
        let rep = rep_input(cfg)?.unwrap_or_else(bundled_schottky);
        (LengthOracle::from_rep(rep.clone()), Some(rep))
    };
    let arity = match &reference {
        Some(rep) => rep.arity(),
        None => oracle.arity(),
    };
    let mut config = ReconstructConfig {
        seed: cfg.seed,
        ..ReconstructConfig::default()
    };
    if let Some(n) = cfg.n {
        config.budget = n;
    }
    if let Some(t) = cfg.tol {
        config.accept_rms = t;
    }
    let plan = ReconstructionPlan::new(&oracle, arity, config)?;
    let outcomes: Vec<_> = thread_pool()?.install(|| {
        (0..plan.restarts())
            .into_par_iter()
            .map(|i| plan.run_restart(i))
            .collect()
    });
    let rec = plan.finish(&outcomes)?;
    let fit = rec
        .words
        .iter()
        .zip(rec.targets.iter().zip(&rec.residuals))
        .map(|(w, (&t, &r))| WordFit {
            word: word_letters(w),
            target: t,
            fitted: t + r,
        })
        .collect();
    let mut held_out = Vec::new();
    let extra = if cfg.words.is_empty() {
        held_out_words(arity, &rec.words, 10)
    } else {
        cfg.words.clone()
    };
    for w in extra {
        if let Ok(target) = oracle.length(&w) {
            let fitted = rec.rep.evaluate(&w)?.spectral_length();
            held_out.push(WordFit {
                word: word_letters(&w),
                target,
                fitted,
            });
        }
    }
    let conjugacy_distance = reference.map(|r| conjugacy_distance(&rec.rep, &r)).transpose()?;
    Ok(to_json(&ReconstructOutput {
        parameters: rec.params.clone(),
        representation: RepDto::from_rep(&rec.rep),
        residual_rms: rec.residual_rms,
        best_restart: rec.best_restart,
        restart_rms: rec.restart_rms.clone(),
        crossratio_estimates: rec
            .estimates
            .iter()
            .map(|e| Estimate {
                value: e.value,
                confidence: e.confidence,
            })
            .collect(),
        fit,
        held_out,
        conjugacy_distance,
    }))
}

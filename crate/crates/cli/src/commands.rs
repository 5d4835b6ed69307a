use std::fmt::Write as _;
use std::path::Path;

use otfs_core::analysis::{average_coding_gain, gain_csv, verify_bounds, GainConfig, VerifyConfig};
use otfs_core::channel::sample_channel;
use otfs_core::coding::{min_distance, ConvCode};
use otfs_core::ddmatrix::OtfsGrid;
use otfs_core::format::fixed6;
use otfs_core::montecarlo::{run_ofdm_baseline, run_sweep, Waveform};
use otfs_core::rng::{substream, tag};

use crate::config::{FileConfig, DEFAULT_DELTA_F, DEFAULT_SEED};
use crate::error::CliError;
use crate::manifest::{manifest_path, unix_now, RunManifest};
use crate::{ChannelSampleArgs, Cli, GainArgs, MindistArgs, SimArgs, VerifyArgs};

pub const CHANNEL_CSV_HEADER: &str = "realization,path,delay,doppler,gain_re,gain_im,delay_s,doppler_hz";

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(pool.install(f))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// `sim` and `ofdm`: run the sweep, write the CSV and its manifest.
pub fn sim(cli: &Cli, args: &SimArgs, ofdm: bool) -> Result<(), CliError> {
    let started_unix = unix_now();
    let mut config = match (&args.config, &args.from_manifest) {
        (Some(path), _) => FileConfig::load(path)?.sim_config(cli.seed)?,
        (None, Some(path)) => {
            let mut config = RunManifest::load(path)?.config;
            if let Some(seed) = cli.seed {
                config.seed = seed;
            }
            config.validate()?;
            config
        }
        (None, None) => return Err(CliError::Config("--config or --from-manifest is required".into())),
    };
    let result = if ofdm {
        config.waveform = Waveform::Ofdm;
        run_ofdm_baseline(&config, cli.workers)?
    } else {
        run_sweep(&config, cli.workers)?
    };
    let csv = result.to_csv(cli.timing);
    std::fs::write(&args.out, &csv)?;
    let manifest = RunManifest {
        tool: "otfs".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: if ofdm { "ofdm" } else { "sim" }.into(),
        master_seed: config.seed,
        interleaver_seed: result.interleaver_seed,
        data_bits_per_frame: result.data_bits_per_frame,
        detector: result.detector.clone(),
        config,
        outputs: vec![args.out.clone()],
        started_unix,
        finished_unix: unix_now(),
    };
    let mpath = manifest_path(&args.out);
    manifest.write(&mpath)?;
    print!("{csv}");
    eprintln!("wrote {} and {}", args.out.display(), mpath.display());
    Ok(())
}

pub fn gain(cli: &Cli, args: &GainArgs) -> Result<(), CliError> {
    if args.d_e2.is_empty() {
        return Err(CliError::Config(
            "d_e2: at least one squared distance is required".into(),
        ));
    }
    if args.paths.is_empty() {
        return Err(CliError::Config(
            "paths: at least one path count is required".into(),
        ));
    }
    let grid = OtfsGrid::new(args.m, args.n, DEFAULT_DELTA_F)?;
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let mut results = Vec::new();
    for &paths in &args.paths {
        for &d_e2 in &args.d_e2 {
            let cfg = GainConfig {
                grid,
                paths,
                l_max: args.l_max,
                k_max: args.k_max,
                d_e2,
                budget: args.budget,
                seed,
                db_mean: args.db_mean,
            };
            results.push(with_pool(cli.workers, || average_coding_gain(&cfg))??);
        }
    }
    emit(args.out.as_deref(), &gain_csv(&results))
}

pub fn verify(cli: &Cli, args: &VerifyArgs) -> Result<(), CliError> {
    if args.cases == 0 {
        return Err(CliError::Config("cases: must be at least 1".into()));
    }
    let cfg = VerifyConfig {
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        cases: args.cases,
        max_m: args.max_m,
        max_n: args.max_n,
        max_p: args.max_p,
    };
    let r = with_pool(cli.workers, || verify_bounds(&cfg))??;
    let mut out = String::new();
    let _ = writeln!(out, "cases {}", r.cases);
    let _ = writeln!(out, "full_rank {}", r.full_rank);
    let _ = writeln!(out, "rank_deficient {}", r.rank_deficient);
    for (name, count) in [
        ("diagonal", r.diagonal_violations),
        ("trace", r.trace_violations),
        ("trace_inverse", r.trace_inverse_violations),
        ("eigen_square_sum", r.square_sum_violations),
        ("determinant", r.determinant_violations),
        ("p_condition", r.p_condition_violations),
        ("frobenius", r.frobenius_mismatches),
    ] {
        let _ = writeln!(out, "violations.{name} {count}");
    }
    let _ = writeln!(out, "max_diagonal_deviation {:e}", r.max_diagonal_deviation);
    let _ = writeln!(
        out,
        "diagonal_equality {}",
        if r.diagonal_equality { "yes" } else { "no" }
    );
    let _ = writeln!(
        out,
        "det_below_d_e2_pow_p {} of {} (rate {})",
        r.approx_determinant_violations,
        r.full_rank,
        fixed6(r.approx_violation_rate())
    );
    let _ = writeln!(out, "result {}", if r.passed() { "PASS" } else { "FAIL" });
    print!("{out}");
    if r.passed() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "{} exact-bound violations",
            r.exact_violations()
        )))
    }
}

pub fn mindist(args: &MindistArgs) -> Result<(), CliError> {
    let code = match (&args.code, &args.generators) {
        (Some(name), _) => ConvCode::by_name(name).ok_or_else(|| {
            CliError::Config(format!("code: unknown code `{name}` (expected A, B, C or D)"))
        })?,
        (None, Some(gens)) => {
            let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
            ConvCode::from_octal("custom", &refs)?
        }
        (None, None) => {
            return Err(CliError::Config(
                "code: --code or --generators is required".into(),
            ))
        }
    };
    if args.frame_bits == 0 {
        return Err(CliError::Config("frame_bits: must be at least 1".into()));
    }
    let d = min_distance(&code, args.frame_bits)
        .ok_or_else(|| CliError::Runtime("code has no nonzero codeword".into()))?;
    println!("code {}", code.name);
    println!("generators {} (octal)", code.octal().join(","));
    println!("memory {}", code.memory);
    println!("frame_bits {}", args.frame_bits);
    println!("d_free {}", d.free);
    println!("min_frame_weight {}", d.frame);
    println!("min_d_e2 {}", fixed6(d.euclidean_sq()));
    if d.frame_limited {
        println!("frame_limited yes (frame too short for a free-distance error event)");
    } else {
        println!("frame_limited no");
    }
    Ok(())
}

/// Realization `i` is the channel seen by trial `i` at the first SNR point
/// of a sweep with the same seed.
pub fn channel_sample(cli: &Cli, args: &ChannelSampleArgs) -> Result<(), CliError> {
    let file = FileConfig::load(&args.config)?;
    let grid = file.grid()?;
    let profile = file.channel()?;
    let seed = cli.seed.or(file.sim.seed).unwrap_or(DEFAULT_SEED);
    let mut out = String::from(CHANNEL_CSV_HEADER);
    out.push('\n');
    for i in 0..args.count {
        let ch = sample_channel(&profile, &mut substream(seed, &[0, i, tag::CHANNEL]))?;
        let (taus, nus) = (ch.delays_seconds(&grid), ch.dopplers_hz(&grid));
        for (p, (path, h)) in ch.paths.iter().zip(&ch.gains).enumerate() {
            let _ = writeln!(
                out,
                "{i},{p},{},{},{},{},{},{}",
                path.delay,
                path.doppler,
                fixed6(h.re),
                fixed6(h.im),
                fixed6(taus[p]),
                fixed6(nus[p])
            );
        }
    }
    emit(args.out.as_deref(), &out)
}

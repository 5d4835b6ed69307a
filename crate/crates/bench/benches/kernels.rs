use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use otfs_core::channel::{sample_channel, ChannelProfile};
use otfs_core::coding::{BcjrDecoder, ConvCode, MaxStar};
use otfs_core::ddmatrix::{build_heff, build_omega, OtfsGrid, PathIndex};
use otfs_core::eigen::hermitian_eig;
use otfs_core::modem::{bpsk_symbols, NoiseSpec};
use otfs_core::montecarlo::{detect_lmmse, detect_map_exact, CandidateSpace, LlrMode};
use otfs_core::rng::substream;
use otfs_core::C64;
use rand::Rng;

fn heff(c: &mut Criterion) {
    let grid = OtfsGrid::new(8, 8, 15e3).unwrap();
    let ch = sample_channel(&ChannelProfile::rayleigh(8, 3, 3), &mut substream(1, &[0])).unwrap();
    c.bench_function("build_heff_8x8_p8", |b| {
        b.iter(|| build_heff(black_box(&grid), &ch.gains, &ch.paths).unwrap())
    });
}

fn eig(c: &mut Criterion) {
    let grid = OtfsGrid::new(8, 8, 15e3).unwrap();
    let mut rng = substream(2, &[0]);
    let e: Vec<C64> = (0..64)
        .map(|_| C64::new(2.0 * f64::from(rng.random_range(-1i8..=1)), 0.0))
        .collect();
    let paths: Vec<PathIndex> = (0..8).map(|i| PathIndex::new(i % 4, i as i64 / 4 - 1)).collect();
    let omega = build_omega(&grid, &e, &paths).unwrap().omega;
    c.bench_function("hermitian_eig_8x8", |b| {
        b.iter(|| hermitian_eig(black_box(&omega)).unwrap())
    });
}

fn bcjr(c: &mut Criterion) {
    let code = ConvCode::code_d();
    let data_len = 128;
    let mut rng = substream(3, &[0]);
    let data: Vec<u8> = (0..data_len).map(|_| rng.random_range(0..2)).collect();
    let llrs: Vec<f64> = code
        .encode(&data)
        .iter()
        .map(|&b| if b == 0 { 2.0 } else { -2.0 } + rng.random_range(-2.5..2.5))
        .collect();
    for mode in [MaxStar::Exact, MaxStar::MaxLog] {
        let dec = BcjrDecoder::new(&code, mode);
        c.bench_function(&format!("bcjr_code_d_128_{mode:?}"), |b| {
            b.iter(|| dec.decode(black_box(&llrs), data_len).unwrap())
        });
    }
}

fn detect(c: &mut Criterion) {
    let grid = OtfsGrid::new(2, 4, 15e3).unwrap();
    let ch = sample_channel(&ChannelProfile::rayleigh(2, 1, 1), &mut substream(4, &[0])).unwrap();
    let h = build_heff(&grid, &ch.gains, &ch.paths).unwrap().matrix;
    let noise = NoiseSpec::from_snr_db(10.0);
    let x = bpsk_symbols(&[0, 1, 1, 0, 1, 0, 0, 1], noise.es);
    let y = h.mul_vec(&x);
    let space = CandidateSpace::uncoded(8, noise.es).unwrap();
    c.bench_function("map_exact_mn8", |b| {
        b.iter(|| detect_map_exact(black_box(&y), &h, &noise, &space, LlrMode::FullSum).unwrap())
    });
    c.bench_function("lmmse_mn8", |b| {
        b.iter(|| detect_lmmse(black_box(&y), &h, &noise).unwrap())
    });
}

criterion_group!(benches, heff, eig, bcjr, detect);
criterion_main!(benches);

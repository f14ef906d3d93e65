use criterion::{black_box, criterion_group, criterion_main, Criterion};
use marble_core::analysis::{truth_table, verify_gate};
use marble_core::gates::library;
use marble_core::netlist::{elaborate, parse, ElaborateOptions};
use marble_core::sim::{simulate, SimConfig};
use marble_core::CollisionMode;

fn single_runs(c: &mut Criterion) {
    let fredkin = library().circuit("FREDKIN_DIRECT").unwrap();
    let adder = library().circuit("FULL_ADDER").unwrap();
    let quiet = SimConfig {
        trace_enabled: false,
        ..SimConfig::new(CollisionMode::Merge)
    };
    c.bench_function("simulate/fredkin_direct_101", |b| {
        b.iter(|| simulate(&fredkin, black_box(&[true, false, true]), quiet).unwrap())
    });
    c.bench_function("simulate/full_adder_111_traced", |b| {
        b.iter(|| {
            simulate(
                &adder,
                black_box(&[true; 3]),
                SimConfig::new(CollisionMode::Bounce),
            )
            .unwrap()
        })
    });
}

fn tables(c: &mut Criterion) {
    let toffoli = library().circuit("TOFFOLI").unwrap();
    c.bench_function("truth_table/toffoli", |b| {
        b.iter(|| truth_table(&toffoli, CollisionMode::Bounce).unwrap())
    });
    c.bench_function("verify/fredkin_chained", |b| {
        b.iter(|| verify_gate("FREDKIN_CHAINED").unwrap())
    });
}

fn front_end(c: &mut Criterion) {
    let text = "circuit add4\ninput a, b, c\noutput s, k\n\
gate F : FULL_ADDER\nconnect a -> F.a\nconnect b -> F.b\nconnect c -> F.cin\n\
connect F.sum -> s\nconnect F.cout -> k\n";
    c.bench_function("parse_and_elaborate/full_adder_wrapper", |b| {
        b.iter(|| {
            let ast = parse(black_box(text)).unwrap();
            elaborate(&ast, library(), ElaborateOptions::default()).unwrap()
        })
    });
}

criterion_group!(benches, single_runs, tables, front_end);
criterion_main!(benches);

//! Code-capacity decoding: random weight-t errors on a color patch, decoded
//! by exhaustive minimum weight.
//!
//! Usage: cargo run --example minweight_decoder [d] [t]

use colorsurg::decoding::{decode_minweight, syndrome_of};
use colorsurg::geometry::build_color_patch;
use colorsurg::{Pauli, PauliOp};
use rand::{Rng, SeedableRng};

fn main() -> colorsurg::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().ok());
    let d = args.next().flatten().unwrap_or(5);
    let t = args.next().flatten().unwrap_or((d - 1) / 2);
    let patch = build_color_patch(d as i64)?;
    let cs = patch.checkset();
    let n = patch.n();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut ok = 0;
    let trials = 200;
    for _ in 0..trials {
        let mut e = PauliOp::identity(n);
        while e.weight() < t {
            e.set(rng.gen_range(0..n), [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)]);
        }
        let fix = decode_minweight(&cs, &syndrome_of(&cs, &e))?;
        // success when the residual is a stabilizer
        if cs.contains(&e.mul_unsigned(&fix)) {
            ok += 1;
        }
    }
    println!("d={d}, weight-{t} errors: {ok}/{trials} corrected");
    Ok(())
}

use densecsp::{Instance, TemplateId, Var};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random instance with moderate constraint density.
pub fn random_instance(rng: &mut ChaCha8Rng, template: TemplateId, n: usize) -> Instance {
    let mut inst = Instance::new(template, n).unwrap();
    match template {
        TemplateId::Horn3 => {
            for _ in 0..rng.gen_range(0..=1) {
                inst.add_tuple(0, &[rng.gen_range(0..n)]).unwrap();
            }
            for _ in 0..rng.gen_range(0..=2) {
                inst.add_tuple(1, &[rng.gen_range(0..n)]).unwrap();
            }
            for _ in 0..rng.gen_range(0..=2 * n) {
                let t = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
                inst.add_tuple(2, &t).unwrap();
            }
        }
        TemplateId::TwoSat => {
            for rel in 0..3 {
                for _ in 0..rng.gen_range(0..=n) {
                    let t = [rng.gen_range(0..n), rng.gen_range(0..n)];
                    inst.add_tuple(rel, &t).unwrap();
                }
            }
        }
    }
    inst
}

/// Every Horn3 instance over two variables: all unary subsets crossed with
/// all subsets of the full 8-triple pool.
pub fn exhaustive_horn3_n2() -> Vec<Instance> {
    let triples: Vec<[Var; 3]> = (0..8)
        .map(|c| [c >> 2 & 1, c >> 1 & 1, c & 1])
        .collect();
    let mut out = Vec::with_capacity(4 * 4 * 256);
    for z_mask in 0..4u32 {
        for o_mask in 0..4u32 {
            for r_mask in 0..256u32 {
                let mut inst = Instance::new(TemplateId::Horn3, 2).unwrap();
                for v in 0..2 {
                    if z_mask >> v & 1 == 1 {
                        inst.add_tuple(0, &[v]).unwrap();
                    }
                    if o_mask >> v & 1 == 1 {
                        inst.add_tuple(1, &[v]).unwrap();
                    }
                }
                for (i, t) in triples.iter().enumerate() {
                    if r_mask >> i & 1 == 1 {
                        inst.add_tuple(2, t).unwrap();
                    }
                }
                out.push(inst);
            }
        }
    }
    out
}

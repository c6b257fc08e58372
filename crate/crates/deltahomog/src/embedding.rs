//! Embedding of the abstract B_l bracket table into so(2l+1).
//!
//! The torus vector e_i goes to F_{2i-1,2i}; root-plane generators for the
//! lex-minimal (sum-free) positive roots are written down directly, and every
//! composite root plane is transported along the extraspecial-pair bracket
//! relations of the abstract table. `verify_embedding` then measures how well
//! the images reproduce every abstract structure constant and the inner
//! product up to the recorded scale kappa.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::compact_lie::{mat_bracket, trace_product, SkewMatrix};
use crate::root_systems::{BracketTable, Family, RootVector};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding is implemented for family B, got {0}")]
    WrongFamily(String),
    #[error("vanishing structure constant during transport")]
    DegenerateTransport,
}

/// Images of the abstract basis elements inside so(2l+1), in basis order.
pub struct Embedding {
    pub n: usize,
    pub images: Vec<SkewMatrix>,
}

fn f_mat(n: usize, i: usize, j: usize) -> SkewMatrix {
    // 1-based indices
    let mut m = DMatrix::zeros(n, n);
    m[(i - 1, j - 1)] = 1.0;
    m[(j - 1, i - 1)] = -1.0;
    SkewMatrix { entries: m }
}

/// Classification of a B_l root in e-coordinates.
enum BRoot {
    Short { i: usize },
    LongMinus { i: usize, j: usize },
    LongPlus { i: usize, j: usize },
}

fn classify_b_root(r: &RootVector) -> BRoot {
    let support: Vec<(usize, i64)> = r
        .coords2
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (i + 1, c / 2))
        .collect();
    match support.as_slice() {
        [(i, 1)] => BRoot::Short { i: *i },
        [(i, 1), (j, -1)] => BRoot::LongMinus { i: *i, j: *j },
        [(i, 1), (j, 1)] => BRoot::LongPlus { i: *i, j: *j },
        other => panic!("not a positive B root: {other:?}"),
    }
}

/// Direct generator pair (u, v) for a positive B_l root inside so(2l+1).
fn direct_pair(n: usize, r: &RootVector) -> (SkewMatrix, SkewMatrix) {
    match classify_b_root(r) {
        BRoot::Short { i } => {
            let (a, b) = (2 * i - 1, 2 * i);
            (f_mat(n, a, n).scale(2.0), f_mat(n, b, n).scale(2.0))
        }
        BRoot::LongMinus { i, j } => {
            let (a, b, c, d) = (2 * i - 1, 2 * i, 2 * j - 1, 2 * j);
            (
                f_mat(n, a, c).add(&f_mat(n, b, d)),
                f_mat(n, b, c).add(&f_mat(n, a, d).scale(-1.0)),
            )
        }
        BRoot::LongPlus { i, j } => {
            let (a, b, c, d) = (2 * i - 1, 2 * i, 2 * j - 1, 2 * j);
            (
                f_mat(n, a, c).add(&f_mat(n, b, d).scale(-1.0)),
                f_mat(n, a, d).add(&f_mat(n, b, c)),
            )
        }
    }
}

/// Builds the embedding of a B_l table into so(2l+1).
pub fn embed_b_into_so(table: &BracketTable) -> Result<Embedding, EmbedError> {
    if table.family != Family::B {
        return Err(EmbedError::WrongFamily(table.family.name().to_string()));
    }
    let l = table.rank;
    let n = 2 * l + 1;
    let dim = table.dim();
    let mut images: Vec<Option<SkewMatrix>> = vec![None; dim];
    for i in 0..l {
        images[i] = Some(f_mat(n, 2 * i + 1, 2 * i + 2));
    }

    // Positive roots are lex sorted, so every extraspecial constituent of a
    // root is resolved before the root itself.
    for (k, gamma) in table.pos_roots.iter().enumerate() {
        // find the extraspecial pair: minimal positive alpha with
        // gamma - alpha a positive root
        let mut extraspecial: Option<(usize, usize)> = None;
        for (ai, alpha) in table.pos_roots.iter().enumerate() {
            let beta = gamma.sub(alpha);
            if beta.is_positive() {
                if let Ok(bi) = table.pos_roots.binary_search(&beta) {
                    if alpha < &beta {
                        extraspecial = Some((ai, bi));
                        break;
                    }
                }
            }
        }
        match extraspecial {
            None => {
                let (u, v) = direct_pair(n, gamma);
                images[table.u_index(k)] = Some(u);
                images[table.v_index(k)] = Some(v);
            }
            Some((ai, bi)) => {
                // [u_a, u_b] = N(a,b) u_g + N(a,-b) u_{|a-b|}
                // [u_a, v_b] = N(a,b) v_g + N(a,-b) v_{|a-b|}
                let alpha = &table.pos_roots[ai];
                let beta = &table.pos_roots[bi];
                let n_sum = structure_pair(table, ai, bi, k);
                if n_sum == 0.0 {
                    return Err(EmbedError::DegenerateTransport);
                }
                let diff = beta.sub(alpha);
                let diff_idx = table.pos_roots.binary_search(&diff).ok();
                let ua = images[table.u_index(ai)].clone().unwrap();
                let ub = images[table.u_index(bi)].clone().unwrap();
                let vb = images[table.v_index(bi)].clone().unwrap();
                let mut u_g = mat_bracket(&ua, &ub).unwrap();
                let mut v_g = mat_bracket(&ua, &vb).unwrap();
                if let Some(di) = diff_idx {
                    let n_diff = structure_pair(table, ai, bi, di);
                    u_g = u_g.add(&images[table.u_index(di)].clone().unwrap().scale(-n_diff));
                    v_g = v_g.add(&images[table.v_index(di)].clone().unwrap().scale(-n_diff));
                }
                images[table.u_index(k)] = Some(u_g.scale(1.0 / n_sum));
                images[table.v_index(k)] = Some(v_g.scale(1.0 / n_sum));
            }
        }
    }

    Ok(Embedding {
        n,
        images: images.into_iter().map(Option::unwrap).collect(),
    })
}

/// Coefficient of u_{target} in [u_a, u_b] read from the stored table.
fn structure_pair(table: &BracketTable, ai: usize, bi: usize, target: usize) -> f64 {
    let entries = table.bracket_basis(table.u_index(ai), table.u_index(bi));
    let want = table.u_index(target) as u16;
    entries
        .iter()
        .find(|&&(k, _)| k == want)
        .map(|&(_, c)| *c.numer() as f64 / *c.denom() as f64)
        .unwrap_or(0.0)
}

/// Maximum relative deviation between so(2l+1) brackets/inner products of the
/// images and the abstract table (inner products compared up to kappa).
pub fn verify_embedding(table: &BracketTable, emb: &Embedding) -> f64 {
    let dim = table.dim();
    let kappa = *table.kappa.numer() as f64 / *table.kappa.denom() as f64;
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let concrete = mat_bracket(&emb.images[i], &emb.images[j]).unwrap();
            // abstract bracket of basis elements, pushed through the images
            let mut expected = SkewMatrix::zeros(emb.n);
            for &(k, c) in &table.bracket_basis(i, j) {
                let cf = *c.numer() as f64 / *c.denom() as f64;
                expected = expected.add(&emb.images[k as usize].scale(cf));
            }
            let dev = (&concrete.entries - &expected.entries).abs().max();
            let scale = 1.0 + expected.entries.abs().max();
            worst = worst.max(dev / scale);

            let ip_concrete = trace_product(&emb.images[i], &emb.images[j]).unwrap();
            let xi = crate::root_systems::BracketTable::basis_elt(table, i);
            let xj = crate::root_systems::BracketTable::basis_elt(table, j);
            let ip_abstract = table.inner(&xi, &xj).unwrap();
            let ip_abstract = *ip_abstract.numer() as f64 / *ip_abstract.denom() as f64;
            let dev_ip = (ip_concrete - kappa * ip_abstract).abs() / (1.0 + ip_abstract.abs());
            worst = worst.max(dev_ip);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_systems::{build_bracket_table, build_root_system};

    #[test]
    fn b2_embeds_into_so5_exactly() {
        let rs = build_root_system(Family::B, 2).unwrap();
        let table = build_bracket_table(&rs).unwrap();
        let emb = embed_b_into_so(&table).unwrap();
        let worst = verify_embedding(&table, &emb);
        assert!(worst <= 1e-10, "worst deviation {worst}");
    }

    #[test]
    fn b1_embeds_into_so3() {
        let rs = build_root_system(Family::B, 1).unwrap();
        let table = build_bracket_table(&rs).unwrap();
        let emb = embed_b_into_so(&table).unwrap();
        assert!(verify_embedding(&table, &emb) <= 1e-12);
    }

    #[test]
    fn non_b_families_are_rejected() {
        let rs = build_root_system(Family::A, 2).unwrap();
        let table = build_bracket_table(&rs).unwrap();
        assert!(matches!(
            embed_b_into_so(&table),
            Err(EmbedError::WrongFamily(_))
        ));
    }
}

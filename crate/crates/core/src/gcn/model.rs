use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use super::{GcnParams, SparseAdj};
use crate::error::{Error, Result};

/// Hidden activations and output logits for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    /// Post-ReLU first-layer output.
    pub hidden: Array2<f64>,
    pub logits: Array2<f64>,
}

struct Pass {
    ax: Array2<f64>,
    z1: Array2<f64>,
    hidden: Array2<f64>,
    ah: Array2<f64>,
    logits: Array2<f64>,
}

fn check_shapes(params: &GcnParams, adj: &SparseAdj, features: ArrayView2<'_, f64>) -> Result<()> {
    if features.nrows() != adj.dim() {
        return Err(Error::invalid(format!(
            "{} feature rows for a {}-node adjacency",
            features.nrows(),
            adj.dim()
        )));
    }
    if features.ncols() != params.input_dim() {
        return Err(Error::invalid(format!(
            "feature dimension {} but the model expects {}",
            features.ncols(),
            params.input_dim()
        )));
    }
    Ok(())
}

fn run(params: &GcnParams, adj: &SparseAdj, features: ArrayView2<'_, f64>) -> Pass {
    let ax = adj.matmul(features);
    let z1 = ax.dot(&params.w1) + &params.b1;
    let hidden = z1.mapv(|x| x.max(0.0));
    let ah = adj.matmul(hidden.view());
    let logits = ah.dot(&params.w2) + &params.b2;
    Pass {
        ax,
        z1,
        hidden,
        ah,
        logits,
    }
}

pub fn forward(
    params: &GcnParams,
    adj: &SparseAdj,
    features: ArrayView2<'_, f64>,
) -> Result<Embeddings> {
    check_shapes(params, adj, features)?;
    let pass = run(params, adj, features);
    Ok(Embeddings {
        hidden: pass.hidden,
        logits: pass.logits,
    })
}

/// Mean train-node cross-entropy plus `beta / 2 · ‖params − anchor‖²`,
/// with its exact gradient.
pub fn loss_and_grads(
    params: &GcnParams,
    adj: &SparseAdj,
    features: ArrayView2<'_, f64>,
    labels: &[usize],
    train: &[bool],
    anchor: &GcnParams,
    beta: f64,
) -> Result<(f64, GcnParams)> {
    check_shapes(params, adj, features)?;
    if labels.len() != adj.dim() || train.len() != adj.dim() {
        return Err(Error::invalid("labels/train mask do not cover every node"));
    }
    if !anchor.same_shape(params) {
        return Err(Error::invalid("proximal anchor has a different shape"));
    }
    let n_train = train.iter().filter(|&&t| t).count();
    if n_train == 0 {
        return Err(Error::invalid("no Train nodes"));
    }
    let classes = params.num_classes();
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::invalid(format!(
            "label {bad} outside [0, {classes})"
        )));
    }

    let pass = run(params, adj, features);
    let scale = 1.0 / n_train as f64;
    let mut ce = 0.0;
    // d loss / d logits
    let mut d_logits = Array2::<f64>::zeros(pass.logits.dim());
    for (i, row) in pass.logits.rows().into_iter().enumerate() {
        if !train[i] {
            continue;
        }
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let sum_exp: f64 = row.iter().map(|&x| (x - max).exp()).sum();
        let log_z = max + sum_exp.ln();
        ce += log_z - row[labels[i]];
        let mut d = d_logits.row_mut(i);
        for (c, &x) in row.iter().enumerate() {
            d[c] = (x - log_z).exp() * scale;
        }
        d[labels[i]] -= scale;
    }
    ce *= scale;

    let d_w2 = pass.ah.t().dot(&d_logits);
    let d_b2 = d_logits.sum_axis(Axis(0));
    // Â is symmetric, so Âᵀ = Â
    let d_hidden = adj.matmul(d_logits.dot(&params.w2.t()).view());
    let mut d_z1 = d_hidden;
    Zip::from(&mut d_z1).and(&pass.z1).for_each(|d, &z| {
        if z <= 0.0 {
            *d = 0.0
        }
    });
    let d_w1 = pass.ax.t().dot(&d_z1);
    let d_b1 = d_z1.sum_axis(Axis(0));

    let mut grads = GcnParams {
        w1: d_w1,
        b1: d_b1,
        w2: d_w2,
        b2: d_b2,
    };
    let mut loss = ce;
    if beta != 0.0 {
        loss += 0.5 * beta * params.sq_distance(anchor);
        grads.add_scaled_difference(beta, params, anchor);
    }
    Ok((loss, grads))
}

/// Fraction of `mask`ed nodes whose argmax logit equals the label; ties go
/// to the smallest class id.
pub fn accuracy(logits: ArrayView2<'_, f64>, labels: &[usize], mask: &[bool]) -> Result<f64> {
    let mut total = 0usize;
    let mut correct = 0usize;
    for (i, row) in logits.rows().into_iter().enumerate() {
        if !mask[i] {
            continue;
        }
        total += 1;
        if argmax(&row.to_owned()) == labels[i] {
            correct += 1;
        }
    }
    if total == 0 {
        return Err(Error::invalid("accuracy over an empty split"));
    }
    Ok(correct as f64 / total as f64)
}

fn argmax(row: &Array1<f64>) -> usize {
    let mut best = 0;
    for (c, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcn::normalize_masked_adjacency;
    use crate::rng::seeded;
    use ndarray::Array2;
    use rand::Rng;
    use rand_distr::StandardNormal;

    struct Instance {
        params: GcnParams,
        anchor: GcnParams,
        adj: SparseAdj,
        x: Array2<f64>,
        labels: Vec<usize>,
        train: Vec<bool>,
        beta: f64,
    }

    fn random_instance(seed: u64) -> Instance {
        let mut rng = seeded(seed);
        let n = rng.random_range(2..=10);
        let d = rng.random_range(1..=5);
        let h = rng.random_range(1..=8);
        let c = rng.random_range(2..=4);
        let mut edges = Vec::new();
        let mut w = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < 0.4 {
                    edges.push((u, v));
                    w.push(rng.random::<f64>());
                }
            }
        }
        let mut params = GcnParams::glorot(d, h, c, seed ^ 0xABCD);
        params.b1.mapv_inplace(|_| rng.random_range(-0.3..0.3));
        params.b2.mapv_inplace(|_| rng.random_range(-0.3..0.3));
        let mut train: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.6).collect();
        train[0] = true;
        Instance {
            anchor: GcnParams::glorot(d, h, c, seed ^ 0x1234),
            params,
            adj: normalize_masked_adjacency(&edges, &w, n).unwrap(),
            x: Array2::from_shape_simple_fn((n, d), || rng.sample(StandardNormal)),
            labels: (0..n).map(|_| rng.random_range(0..c)).collect(),
            train,
            beta: rng.random_range(0.0..0.5),
        }
    }

    fn loss_at(inst: &Instance, p: &GcnParams) -> f64 {
        loss_and_grads(
            p,
            &inst.adj,
            inst.x.view(),
            &inst.labels,
            &inst.train,
            &inst.anchor,
            inst.beta,
        )
        .unwrap()
        .0
    }

    /// Analytic gradients against central differences with h = 1e-5.
    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-5;
        for seed in 0..25 {
            let inst = random_instance(seed);
            let (_, grads) = loss_and_grads(
                &inst.params,
                &inst.adj,
                inst.x.view(),
                &inst.labels,
                &inst.train,
                &inst.anchor,
                inst.beta,
            )
            .unwrap();
            for t in 0..4 {
                let len = inst.params.tensors()[t].1.len();
                for k in 0..len {
                    let mut plus = inst.params.clone();
                    plus.tensors_mut()[t].1[k] += h;
                    let mut minus = inst.params.clone();
                    minus.tensors_mut()[t].1[k] -= h;
                    let fd = (loss_at(&inst, &plus) - loss_at(&inst, &minus)) / (2.0 * h);
                    let an = grads.tensors()[t].1[k];
                    let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-6);
                    assert!(rel < 1e-4, "seed {seed} tensor {t}[{k}]: fd {fd} vs {an}");
                }
            }
        }
    }

    #[test]
    fn matches_dense_oracle_on_two_node_path() {
        let adj = normalize_masked_adjacency(&[(0, 1)], &[0.7], 2).unwrap();
        let mut params = GcnParams::glorot(3, 4, 2, 9);
        params.b1 = Array1::from(vec![0.1, -0.2, 0.3, 0.0]);
        params.b2 = Array1::from(vec![0.05, -0.05]);
        let x = Array2::from_shape_vec((2, 3), vec![0.5, -1.0, 2.0, 1.5, 0.3, -0.7]).unwrap();
        let emb = forward(&params, &adj, x.view()).unwrap();
        let a = adj.to_dense();
        let h1 = (a.dot(&x).dot(&params.w1) + &params.b1).mapv(|v| v.max(0.0));
        let out = a.dot(&h1).dot(&params.w2) + &params.b2;
        for (p, q) in emb.logits.iter().zip(out.iter()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_features_give_zero_logits() {
        let adj = normalize_masked_adjacency(&[(0, 1), (1, 2)], &[1.0, 1.0], 3).unwrap();
        let params = GcnParams::glorot(4, 5, 3, 1);
        let emb = forward(&params, &adj, Array2::zeros((3, 4)).view()).unwrap();
        assert!(emb.logits.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn isolated_node_relu_passthrough() {
        let adj = SparseAdj::identity(1);
        let mut params = GcnParams::zeros(3, 3, 2);
        params.w1 = Array2::eye(3);
        let x = Array2::from_shape_vec((1, 3), vec![0.5, 0.0, 2.0]).unwrap();
        let emb = forward(&params, &adj, x.view()).unwrap();
        assert_eq!(emb.hidden.row(0).to_vec(), vec![0.5, 0.0, 2.0]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let adj = SparseAdj::identity(2);
        let params = GcnParams::zeros(3, 2, 2);
        assert!(forward(&params, &adj, Array2::zeros((2, 4)).view()).is_err());
        assert!(forward(&params, &adj, Array2::zeros((3, 3)).view()).is_err());
    }

    #[test]
    fn uniform_logits_cost_ln_c() {
        let adj = SparseAdj::identity(4);
        let params = GcnParams::zeros(2, 3, 5);
        let x = Array2::ones((4, 2));
        let (loss, _) = loss_and_grads(
            &params,
            &adj,
            x.view(),
            &[0, 1, 2, 3],
            &[true; 4],
            &params,
            0.7,
        )
        .unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn proximal_term_vanishes_at_anchor() {
        let inst = random_instance(3);
        let run = |beta| {
            loss_and_grads(
                &inst.params,
                &inst.adj,
                inst.x.view(),
                &inst.labels,
                &inst.train,
                &inst.params,
                beta,
            )
            .unwrap()
        };
        let (l0, g0) = run(0.0);
        let (l1, g1) = run(123.0);
        assert_eq!(l0, l1);
        assert_eq!(g0, g1);
    }

    #[test]
    fn no_train_nodes_rejected() {
        let inst = random_instance(1);
        let none = vec![false; inst.labels.len()];
        assert!(loss_and_grads(
            &inst.params,
            &inst.adj,
            inst.x.view(),
            &inst.labels,
            &none,
            &inst.anchor,
            0.1
        )
        .is_err());
    }

    #[test]
    fn permutation_equivariance() {
        for seed in 0..5 {
            let inst = random_instance(seed + 100);
            let n = inst.labels.len();
            let mut rng = seeded(seed);
            let mut perm: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            // rebuild the permuted instance from the dense adjacency
            let dense = inst.adj.to_dense();
            let mut edges = Vec::new();
            let mut w = Vec::new();
            // recover raw weights: a_ij = w / sqrt(d_i d_j), a_ii = 1 / d_i
            for i in 0..n {
                for j in (i + 1)..n {
                    if dense[[i, j]] > 0.0 {
                        let raw = dense[[i, j]] / (dense[[i, i]] * dense[[j, j]]).sqrt();
                        edges.push((perm[i], perm[j]));
                        w.push(raw);
                    }
                }
            }
            let adj_p = normalize_masked_adjacency(&edges, &w, n).unwrap();
            let mut inv = vec![0; n];
            for (i, &p) in perm.iter().enumerate() {
                inv[p] = i;
            }
            let x_p = inst.x.select(Axis(0), &inv);
            let labels_p: Vec<usize> = inv.iter().map(|&i| inst.labels[i]).collect();
            let train_p: Vec<bool> = inv.iter().map(|&i| inst.train[i]).collect();
            let e = forward(&inst.params, &inst.adj, inst.x.view()).unwrap();
            let e_p = forward(&inst.params, &adj_p, x_p.view()).unwrap();
            for (i, &pi) in perm.iter().enumerate() {
                for c in 0..e.logits.ncols() {
                    assert!((e.logits[[i, c]] - e_p.logits[[pi, c]]).abs() < 1e-12);
                }
            }
            let l = loss_at(&inst, &inst.params);
            let (l_p, _) = loss_and_grads(
                &inst.params,
                &adj_p,
                x_p.view(),
                &labels_p,
                &train_p,
                &inst.anchor,
                inst.beta,
            )
            .unwrap();
            assert!((l - l_p).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_mask_is_a_per_node_mlp() {
        let inst = random_instance(7);
        let n = inst.labels.len();
        let edges: Vec<(usize, usize)> = (1..n).map(|v| (0, v)).collect();
        let adj = normalize_masked_adjacency(&edges, &vec![0.0; edges.len()], n).unwrap();
        let emb = forward(&inst.params, &adj, inst.x.view()).unwrap();
        let p = &inst.params;
        let h = (inst.x.dot(&p.w1) + &p.b1).mapv(|v| v.max(0.0));
        let out = h.dot(&p.w2) + &p.b2;
        assert_eq!(emb.hidden, h);
        assert_eq!(emb.logits, out);
    }

    #[test]
    fn accuracy_cases() {
        let labels = [0, 2, 1, 1];
        let onehot = Array2::from_shape_fn((4, 3), |(i, c)| (c == labels[i]) as u8 as f64);
        assert_eq!(accuracy(onehot.view(), &labels, &[true; 4]).unwrap(), 1.0);
        let shifted =
            Array2::from_shape_fn((4, 3), |(i, c)| (c == (labels[i] + 1) % 3) as u8 as f64);
        assert_eq!(accuracy(shifted.view(), &labels, &[true; 4]).unwrap(), 0.0);
        // tie resolves to class 0
        let tied = Array2::zeros((4, 3));
        assert_eq!(
            accuracy(tied.view(), &labels, &[true, false, false, false]).unwrap(),
            1.0
        );
        assert!(accuracy(tied.view(), &labels, &[false; 4]).is_err());
    }

    #[test]
    fn random_logits_score_one_half() {
        for seed in 0..5 {
            let mut rng = seeded(seed);
            let logits = Array2::from_shape_simple_fn((1000, 2), || rng.random::<f64>());
            let labels: Vec<usize> = (0..1000).map(|_| rng.random_range(0..2)).collect();
            let acc = accuracy(logits.view(), &labels, &[true; 1000]).unwrap();
            assert!((acc - 0.5).abs() < 0.05, "seed {seed}: {acc}");
        }
    }
}

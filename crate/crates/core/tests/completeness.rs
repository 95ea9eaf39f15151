use manakov_core::completeness::*;
use manakov_core::invariants::{BracketKind, Carrier, IntegralFamily, MemberTag};
use manakov_core::liealg::{bracket, sample_generic, so_coords, so_from_coords, Space, WedgeSpan};
use manakov_core::linalg::{column_space, containment_residual, frobenius, null_space, subspace_distance};
use manakov_core::{BlockPartition, Matrix, SpectralParams};

fn partition(parts: &[usize]) -> BlockPartition {
    BlockPartition::new(parts.to_vec()).unwrap()
}

/// Centralizer dimension from the spectrum: eigenvalues `±iλ` with multiplicity `m`
/// contribute `m²`, a zero eigenvalue of multiplicity `m0` contributes `m0(m0-1)/2`.
fn orbit_from_spectrum(x: &Matrix) -> usize {
    let n = x.nrows();
    let mut imag: Vec<f64> = x.complex_eigenvalues().iter().map(|z| z.im.abs()).collect();
    imag.sort_by(f64::total_cmp);
    let scale = frobenius(x).max(1.0);
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for v in imag {
        match groups.last_mut() {
            Some((w, c)) if (v - *w).abs() < 1e-7 * scale => *c += 1,
            _ => groups.push((v, 1)),
        }
    }
    let mut centralizer = 0;
    for (v, c) in groups {
        if v < 1e-7 * scale {
            centralizer += c * (c - 1) / 2;
        } else {
            // c counts both +iλ and -iλ
            centralizer += (c / 2) * (c / 2);
        }
    }
    n * (n - 1) / 2 - centralizer
}

/// Random element of `SO(n)_A`: orthogonal blocks from QR with determinant fixed to +1.
fn random_isotropy_element(p: &BlockPartition, seed: u64) -> Matrix {
    let n = p.n();
    let raw = manakov_core::liealg::sample_square(seed, n);
    let mut k = Matrix::zeros(n, n);
    for b in 0..p.blocks() {
        let (o, s) = (p.offset(b), p.parts()[b]);
        let mut q = raw.view((o, o), (s, s)).into_owned().qr().q();
        if q.determinant() < 0.0 {
            let col = -q.column(0).into_owned();
            q.set_column(0, &col);
        }
        k.view_mut((o, o), (s, s)).copy_from(&q);
    }
    k
}

#[test]
fn orbit_dimension_matches_spectral_oracle() {
    for n in 2..=8 {
        for seed in 0..5 {
            let x = sample_generic(seed, &Space::So(n));
            assert_eq!(orbit_dimension(&x, 1e4).0, orbit_from_spectrum(&x), "n={n} seed={seed}");
        }
    }
    for parts in [[1, 3].as_slice(), &[1, 4], &[2, 2], &[1, 6], &[2, 5], &[3, 3], &[1, 1, 4]] {
        let p = partition(parts);
        let x = sample_generic(3, &Space::Transversal(p.clone()));
        assert_eq!(orbit_dimension(&x, 1e4).0, orbit_from_spectrum(&x), "{parts:?}");
    }
}

#[test]
fn j_space_is_the_complement_of_the_isotropy_orbit_directions() {
    for parts in [[1, 3].as_slice(), &[2, 2], &[1, 4], &[2, 3], &[1, 2, 3]] {
        let p = partition(parts);
        let x = sample_generic(8, &Space::Transversal(p.clone()));
        let (j, _) = j_space_transversal(&x, &p, 1e4);
        // oracle: orthogonal complement of pr_v [x, so(n)_A] inside v
        let v = WedgeSpan::transversal(&p);
        let vb = v.basis_columns();
        let mut images = Matrix::zeros(vb.ncols(), WedgeSpan::isotropy(&p).dim());
        for (c, e) in WedgeSpan::isotropy(&p).matrices().iter().enumerate() {
            images.set_column(c, &v.coords(&bracket(&x, e)));
        }
        let (null, _) = null_space(&images.transpose(), frobenius(&x), 1e4);
        let oracle = &vb * null;
        assert!(subspace_distance(&j, &oracle) < 1e-10, "{parts:?}");
        for c in 0..j.ncols() {
            let eta = so_from_coords(p.n(), j.column(c).as_slice());
            let leak = WedgeSpan::isotropy(&p).project(&bracket(&x, &eta));
            assert!(frobenius(&leak) < 1e-12);
        }
    }
}

#[test]
fn theorem3_targets_agree_with_the_spectral_oracle() {
    for parts in [[1, 3].as_slice(), &[1, 4], &[2, 2], &[2, 3], &[1, 1, 3]] {
        let p = partition(parts);
        let params = SpectralParams::standard(p.clone());
        let x = sample_generic(21, &Space::Transversal(p.clone()));
        let m = theorem3_point(&params, &x, &Default::default()).unwrap();
        let oracle = (2 * WedgeSpan::transversal(&p).dim() - orbit_from_spectrum(&x)) / 2;
        assert_eq!(m.ranks["target"], oracle, "{parts:?}");
        assert_eq!(m.ranks["ddim"], oracle, "{parts:?}");
        // the same count written through the reduced bracket
        assert_eq!(2 * m.ranks["ddim"], m.ranks["dim_j"] + m.ranks["corank"], "{parts:?}");
        assert!(m.pass);
    }
}

#[test]
fn generating_set_is_saturated() {
    for parts in [[1, 4].as_slice(), &[2, 3], &[1, 2, 3]] {
        let p = partition(parts);
        let n = p.n();
        let params = SpectralParams::standard(p.clone());
        let v = WedgeSpan::transversal(&p);
        let iso = WedgeSpan::isotropy(&p);
        let x = sample_generic(5, &Space::Transversal(p.clone()));
        let base = IntegralFamily::manakov(&params.a_diag(), Carrier::Span(v.clone()));
        let mut extended = base.clone();
        for k in (n + 1)..=(n + 2) {
            for s in (0..k).filter(|s| (k - s) % 2 == 0) {
                extended.push(MemberTag::L { k, s }).unwrap();
            }
        }
        let a = family_analysis(&base, &x, BracketKind::Reduced, Some(&iso), 1e4).unwrap();
        let b = family_analysis(&extended, &x, BracketKind::Reduced, Some(&iso), 1e4).unwrap();
        assert_eq!(a.ddim, b.ddim, "{parts:?}");
    }
}

#[test]
fn counts_are_invariant_under_isotropy_conjugation() {
    for parts in [[1, 4].as_slice(), &[2, 3], &[2, 2, 2]] {
        let p = partition(parts);
        let params = SpectralParams::standard(p.clone());
        let x = sample_generic(13, &Space::Transversal(p.clone()));
        let k = random_isotropy_element(&p, 99);
        let y = &k * &x * k.transpose();
        let mx = theorem3_point(&params, &x, &Default::default()).unwrap();
        let my = theorem3_point(&params, &y, &Default::default()).unwrap();
        assert_eq!(mx.ranks, my.ranks, "{parts:?}");
    }
    let p = partition(&[2, 2, 2]);
    let params = SpectralParams::standard(p.clone());
    let x = sample_generic(13, &Space::So(6));
    let k = random_isotropy_element(&p, 7);
    let a = theorem1_point(&params, &x, &Default::default()).unwrap();
    let b = theorem1_point(&params, &(&k * &x * k.transpose()), &Default::default()).unwrap();
    assert_eq!(a.ranks, b.ranks);
}

#[test]
fn truncated_family_misses_the_theorem3_count() {
    let p = partition(&[1, 2, 3]);
    let v = WedgeSpan::transversal(&p);
    let x = sample_generic(2, &Space::Transversal(p.clone()));
    let trace = IntegralFamily::from_members(Carrier::Span(v.clone()), vec![0.0; 6], vec![MemberTag::L { k: 2, s: 0 }]).unwrap();
    let a = family_analysis(&trace, &x, BracketKind::Reduced, Some(&WedgeSpan::isotropy(&p)), 1e4).unwrap();
    let target = (2 * v.dim() - orbit_from_spectrum(&x)) / 2;
    assert!(a.ddim < target, "{} vs {target}", a.ddim);
    assert!(subspace_distance(&a.complement, &a.f_basis) > 1e-3);
}

#[test]
fn theorem1_counts() {
    for (parts, target) in [([2, 2].as_slice(), 8), (&[3, 3], 18), (&[2], 2)] {
        let v = verify_theorem1(partition(parts), &[1, 2, 3, 4]).unwrap();
        assert_eq!(v.verdict, Verdict::Pass, "{parts:?}");
        assert!(v.per_point.iter().all(|pt| pt.ranks["lhs"] == target));
    }
}

#[test]
fn theorem1_complement_lies_in_the_span() {
    // F^Λ = F + so(n)_A at generic points, and so(n)_A ⊆ F already
    let v = verify_theorem1(partition(&[2, 3]), &[5, 6]).unwrap();
    assert!(v.max_residual("complement_in_span").unwrap() < 1e-10);
}

#[test]
fn lemma1_random_and_normal_forms() {
    for n in 4..=8 {
        let params = SpectralParams::standard(BlockPartition::trivial(n));
        let m: Vec<f64> = (1..=n / 2).map(|j| j as f64 + 0.3 * j as f64 * j as f64).collect();
        let x = antidiagonal_normal_form(n, &m);
        assert_eq!(lemma1_nullity(&x, &params.a_diag(), 1e4).unwrap().0, n);
        let blocky = SpectralParams::standard(partition(&[2, n - 2]));
        assert_eq!(lemma1_nullity(&x, &blocky.a_diag(), 1e4).unwrap().0, n);
        let v = verify(Target::Lemma1, &VerifyContext::standard(BlockPartition::trivial(n)), &[1, 2, 3]).unwrap();
        assert_eq!(v.verdict, Verdict::Pass);
    }
}

#[test]
fn reductions_of_the_new_regime() {
    for (parts, l, n_reduced) in [([1, 4].as_slice(), 1, 3), (&[1, 6], 2, 3), (&[2, 5], 1, 5)] {
        let p = partition(parts);
        for seed in 0..5 {
            let x = sample_generic(seed, &Space::Transversal(p.clone()));
            let nf = normal_form_reduce(&x, &p).unwrap();
            assert_eq!((nf.l, nf.n_reduced), (l, n_reduced));
            assert!(nf.column_residual <= 1e-12);
            let n = p.n();
            assert!(frobenius(&nf.reduced.rows(n - 2 * l, 2 * l).into_owned()) <= 1e-12 * frobenius(&x));
            assert!(matches!(
                verify_reduction_equality(&nf.reduced, &p, 1e4).unwrap(),
                ReductionEquality::Checked { distance, .. } if distance <= 1e-8
            ));
        }
    }
}

#[test]
fn reduction_of_a_point_already_reduced() {
    // rank-deficient off-diagonal block: the padding still yields a rotation
    let p = partition(&[1, 4]);
    let mut x = Matrix::zeros(5, 5);
    x[(0, 1)] = 1.0;
    x[(1, 0)] = -1.0;
    let nf = normal_form_reduce(&x, &p).unwrap();
    assert!(nf.column_residual <= 1e-12);
    assert!((nf.det - 1.0).abs() < 1e-12);
    assert!(nf.orthogonality < 1e-13);
}

#[test]
fn theorem4_stiefel_cases() {
    for (parts, l) in [([2, 2].as_slice(), 1), (&[3, 3], 1), (&[2, 1, 1], 1), (&[1, 2, 3], 2)] {
        let v = verify_theorem4(partition(parts), l, &[1, 2, 3]).unwrap();
        assert_eq!(v.verdict, Verdict::Pass, "{parts:?}: {:?}", v.per_point);
        assert!(v.max_residual("leak").unwrap() < 1e-12);
    }
}

#[test]
fn theorem4_full_split_is_theorem3() {
    let p = partition(&[2, 3]);
    let t4 = verify_theorem4(p.clone(), 2, &[3, 4]).unwrap();
    let t3 = verify_theorem3(p, &[3, 4]).unwrap();
    for (a, b) in t4.per_point.iter().zip(&t3.per_point) {
        assert_eq!(a.ranks["ddim_commutative"], b.ranks["ddim"]);
        assert_eq!(a.ranks["target"], 2 * b.ranks["target"]);
    }
}

#[test]
fn gradient_span_projection_oracle() {
    // analyze_span on so(3) with the full family of linear forms: F = carrier, F^Λ = ker
    let x = sample_generic(1, &Space::So(3));
    let carrier = WedgeSpan::so(3).basis_columns();
    let grads = Matrix::identity(3, 3);
    let w = poisson_tensor(&x, &manakov_core::invariants::Bracket::lie_poisson(3));
    let a = analyze_span(&grads, &carrier, &w, frobenius(&x), 1e4);
    assert_eq!((a.ddim, a.dind, a.corank), (3, 1, 1));
    let kernel_dir = column_space(&Matrix::from_column_slice(3, 1, so_coords(&x).as_slice()), 1.0, 1e4).0;
    assert!(containment_residual(&a.complement, &kernel_dir) < 1e-12);
}

#[test]
fn verdict_counts_and_seeds() {
    let ctx = VerifyContext::standard(partition(&[1, 3]));
    let v = verify(Target::Theorem3, &ctx, &[9, 3, 5]).unwrap();
    assert_eq!(v.seeds, vec![3, 5, 9]);
    assert_eq!(v.counts.pass, 3);
    assert_eq!(v.tolerances, ctx.tolerances);
    assert!(v.per_point.iter().all(|p| p.attempts == 1 && p.seed == p.requested_seed));
}

mod common;

use common::*;
use hgm_core::contiguity::Contiguity;
use hgm_core::gauss_manin::Connection;
use hgm_core::{
    contiguity_inverse_frame_free, contiguity_matrix, gm_vector_s, matrix_c, shift_down_series,
    shift_up_series, GMVector, Rat, Series, Shape,
};

fn shapes(max_sum: usize) -> Vec<Shape> {
    let mut v = Vec::new();
    for k in 1..max_sum {
        for n in 1..=max_sum - k {
            v.push(Shape::new(k, n).unwrap());
        }
    }
    v
}

#[test]
fn pfaffian_holds_on_the_series() {
    let mut rng = rng(11);
    for shape in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)] {
        let shape = Shape::new(shape.0, shape.1).unwrap();
        let alpha = statistical_alpha(&mut rng, shape, 3);
        let x = x_in_x(&mut rng, shape);
        let series: Series<Rat> = Series::new(&alpha).unwrap();
        let sbar = series.gm_vector(&x).unwrap();
        let mut conn: Connection<Rat> = Connection::new(&alpha).unwrap();
        for (i, j) in x.positions() {
            let psi = conn.psi(&x, i, j).unwrap();
            let lhs = sbar.left_mul(&psi).unwrap();
            let rhs = series.gm_vector_derivative(&x, i, j).unwrap();
            assert_eq!(lhs, rhs, "alpha {alpha} at ({i},{j})");
        }
    }
}

#[test]
fn shift_up_matches_series() {
    let mut rng = rng(12);
    for shape in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let shape = Shape::new(shape.0, shape.1).unwrap();
        for _ in 0..3 {
            let alpha = statistical_alpha(&mut rng, shape, 3);
            let x = x_in_x(&mut rng, shape);
            let sbar = gm_vector_s(&alpha, &x).unwrap();
            for i in 1..=shape.last() {
                let raised = alpha.raised(i).unwrap();
                if raised.require_nonzero().is_err() || raised.require_statistical().is_err() {
                    continue;
                }
                let up = shift_up_series(&alpha, &x, i, &sbar).unwrap();
                assert_eq!(up, gm_vector_s(&raised, &x).unwrap(), "alpha {alpha}, i {i}");
                let down = shift_down_series(&raised, &x, i, &up).unwrap();
                assert_eq!(down, sbar);
            }
        }
    }
}

#[test]
fn shifts_commute() {
    let mut rng = rng(13);
    let shape = Shape::new(2, 2).unwrap();
    let alpha = statistical_alpha(&mut rng, shape, 3);
    let x = x_in_x(&mut rng, shape);
    let sbar = gm_vector_s(&alpha, &x).unwrap();
    let (a, b) = (3, 5);
    let ab = shift_up_series(&alpha.raised(a).unwrap(), &x, b, &shift_up_series(&alpha, &x, a, &sbar).unwrap()).unwrap();
    let ba = shift_up_series(&alpha.raised(b).unwrap(), &x, a, &shift_up_series(&alpha, &x, b, &sbar).unwrap()).unwrap();
    assert_eq!(ab, ba);
}

#[test]
fn contiguity_duality() {
    let mut rng = rng(14);
    for shape in shapes(4) {
        for _ in 0..2 {
            let alpha = nonzero_alpha(&mut rng, shape);
            let x = x_in_x(&mut rng, shape);
            for i in 1..=shape.last() {
                let raised = alpha.raised(i).unwrap();
                let dual = raised.negated();
                if raised.require_nonzero().is_err() || dual.raised(i).unwrap().require_nonzero().is_err() {
                    continue;
                }
                let lhs = contiguity_matrix::<Rat>(&alpha, &x, i).unwrap().mul(&matrix_c(&alpha).unwrap()).unwrap();
                let rhs = matrix_c::<Rat>(&raised)
                    .unwrap()
                    .mul(&contiguity_matrix(&dual, &x, i).unwrap().transpose())
                    .unwrap();
                assert_eq!(lhs.matrix, rhs.matrix, "alpha {alpha}, i {i}");
            }
        }
    }
}

#[test]
fn frame_free_forms_agree() {
    let mut rng = rng(15);
    for shape in shapes(4) {
        let alpha = nonzero_alpha(&mut rng, shape);
        let x = x_in_x(&mut rng, shape);
        let w = random_vector(&mut rng, shape.rank());
        let mut conn: Connection<Rat> = Connection::new(&alpha).unwrap();
        for (i, j) in x.positions() {
            let psi = conn.psi(&x, i, j).unwrap();
            match conn.apply_frame_free(&x, &w, i, j) {
                Ok(v) => assert_eq!(v, psi.matrix.vec_mul(&w)),
                Err(hgm_core::Error::ZeroAlphaJ(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        for i in 1..=shape.last() {
            let Ok(c) = Contiguity::new(&alpha, &x, i) else { continue };
            let inv = c.matrix().unwrap().inverse().unwrap();
            let phi = GMVector::new(shape, w.clone()).unwrap();
            let ff = contiguity_inverse_frame_free(&alpha, &x, i, &phi).unwrap();
            assert_eq!(ff.entries(), &inv.matrix.vec_mul(&w)[..], "alpha {alpha}, i {i}");
        }
    }
}

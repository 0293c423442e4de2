//! Gauss-Legendre abscissae and weights on [-1, 1].
//!
//! Values are written out to 32 significant digits and rounded to `f64` by
//! the compiler. Abscissae are listed in ascending order; the ordering fixes
//! the numbering of hysteresis points inside each element.

#![allow(clippy::excessive_precision)]

use crate::error::{invalid, Result};

/// Largest rule available.
pub const MAX_POINTS: usize = 10;

/// Returns the `(abscissa, weight)` pairs of the `n`-point rule.
pub fn gauss_legendre(n: usize) -> Result<&'static [(f64, f64)]> {
    let rule: &'static [(f64, f64)] = match n {
        1 => &GL1,
        2 => &GL2,
        3 => &GL3,
        4 => &GL4,
        5 => &GL5,
        6 => &GL6,
        7 => &GL7,
        8 => &GL8,
        9 => &GL9,
        10 => &GL10,
        _ => {
            return Err(invalid(
                "n_gauss",
                format!("{n} points requested, rules exist for 1..={MAX_POINTS}"),
            ))
        }
    };
    Ok(rule)
}

#[rustfmt::skip]
mod tables {
pub(super) const GL1: [(f64, f64); 1] = [
    (0.0, 2.0),
];
pub(super) const GL2: [(f64, f64); 2] = [
    (-0.57735026918962576450914878050196, 1.0),
    (0.57735026918962576450914878050196, 1.0),
];
pub(super) const GL3: [(f64, f64); 3] = [
    (-0.77459666924148337703585307995648, 0.55555555555555555555555555555556),
    (0.0, 0.88888888888888888888888888888889),
    (0.77459666924148337703585307995648, 0.55555555555555555555555555555556),
];
pub(super) const GL4: [(f64, f64); 4] = [
    (-0.86113631159405257522394648889281, 0.347854845137453857373063949222),
    (-0.33998104358485626480266575910324, 0.652145154862546142626936050778),
    (0.33998104358485626480266575910324, 0.652145154862546142626936050778),
    (0.86113631159405257522394648889281, 0.347854845137453857373063949222),
];
pub(super) const GL5: [(f64, f64); 5] = [
    (-0.90617984593866399279762687829939, 0.23692688505618908751426404071992),
    (-0.53846931010568309103631442070021, 0.47862867049936646804129151483564),
    (0.0, 0.56888888888888888888888888888889),
    (0.53846931010568309103631442070021, 0.47862867049936646804129151483564),
    (0.90617984593866399279762687829939, 0.23692688505618908751426404071992),
];
pub(super) const GL6: [(f64, f64); 6] = [
    (-0.93246951420315202781230155449399, 0.17132449237917034504029614217273),
    (-0.66120938646626451366139959501991, 0.36076157304813860756983351383772),
    (-0.23861918608319690863050172168071, 0.46791393457269104738987034398955),
    (0.23861918608319690863050172168071, 0.46791393457269104738987034398955),
    (0.66120938646626451366139959501991, 0.36076157304813860756983351383772),
    (0.93246951420315202781230155449399, 0.17132449237917034504029614217273),
];
pub(super) const GL7: [(f64, f64); 7] = [
    (-0.94910791234275852452618968404785, 0.12948496616886969327061143267908),
    (-0.74153118559939443986386477328079, 0.27970539148927666790146777142378),
    (-0.40584515137739716690660641207696, 0.38183005050511894495036977548898),
    (0.0, 0.41795918367346938775510204081633),
    (0.40584515137739716690660641207696, 0.38183005050511894495036977548898),
    (0.74153118559939443986386477328079, 0.27970539148927666790146777142378),
    (0.94910791234275852452618968404785, 0.12948496616886969327061143267908),
];
pub(super) const GL8: [(f64, f64); 8] = [
    (-0.96028985649753623168356086856947, 0.10122853629037625915253135430996),
    (-0.79666647741362673959155393647583, 0.22238103445337447054435599442624),
    (-0.52553240991632898581773904918925, 0.3137066458778872873379622019866),
    (-0.18343464249564980493947614236018, 0.3626837833783619829651504492772),
    (0.18343464249564980493947614236018, 0.3626837833783619829651504492772),
    (0.52553240991632898581773904918925, 0.3137066458778872873379622019866),
    (0.79666647741362673959155393647583, 0.22238103445337447054435599442624),
    (0.96028985649753623168356086856947, 0.10122853629037625915253135430996),
];
pub(super) const GL9: [(f64, f64); 9] = [
    (-0.96816023950762608983557620290367, 0.081274388361574411971892158110524),
    (-0.83603110732663579429942978806973, 0.18064816069485740405847203124291),
    (-0.61337143270059039730870203934147, 0.26061069640293546231874286941863),
    (-0.32425342340380892903853801464334, 0.31234707704000284006863040658444),
    (0.0, 0.33023935500125976316452506928697),
    (0.32425342340380892903853801464334, 0.31234707704000284006863040658444),
    (0.61337143270059039730870203934147, 0.26061069640293546231874286941863),
    (0.83603110732663579429942978806973, 0.18064816069485740405847203124291),
    (0.96816023950762608983557620290367, 0.081274388361574411971892158110524),
];
pub(super) const GL10: [(f64, f64); 10] = [
    (-0.97390652851717172007796401208445, 0.066671344308688137593568809893332),
    (-0.86506336668898451073209668842349, 0.1494513491505805931457763396577),
    (-0.67940956829902440623432736511487, 0.21908636251598204399553493422816),
    (-0.43339539412924719079926594316578, 0.26926671930999635509122692156947),
    (-0.14887433898163121088482600112972, 0.29552422471475287017389299465134),
    (0.14887433898163121088482600112972, 0.29552422471475287017389299465134),
    (0.43339539412924719079926594316578, 0.26926671930999635509122692156947),
    (0.67940956829902440623432736511487, 0.21908636251598204399553493422816),
    (0.86506336668898451073209668842349, 0.1494513491505805931457763396577),
    (0.97390652851717172007796401208445, 0.066671344308688137593568809893332),
];
}
use tables::*;

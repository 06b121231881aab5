//! Finite-sample checks of the good-set properties of a disc class.

use serde::Serialize;

use super::search::verify_inside;
use super::{ClassTag, DiscClass, EbjField};
use crate::discs::{make_touching_disc, DiscSpec, RationalDisc};
use crate::domains::Domain;
use crate::primitives::ComplexVector;

const VERIFY_NODES: usize = 1024;

#[derive(Debug, Clone, Serialize)]
pub struct CentreCheck {
    pub centre: ComplexVector,
    /// A member centred here, if one was produced.
    pub member: Option<DiscSpec>,
    /// The member maps T into X.
    pub boundary_in_x: bool,
    /// For centres in X: the constant disc is admitted.
    pub constant_admitted: Option<bool>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub class: DiscClass,
    pub checks: Vec<CentreCheck>,
    pub failures: usize,
    /// Why the envelope of J over the class is upper semicontinuous with
    /// minimal growth; not checked numerically.
    pub property4: String,
}

fn property4_note(tag: ClassTag) -> &'static str {
    match tag {
        ClassTag::TouchingBalls => {
            "E_B J is the infimum of log⁺(‖·-w‖/d(w,∂X)) over w ∈ X, an infimum of continuous \
             functions of logarithmic growth, hence upper semicontinuous with minimal growth"
        }
        ClassTag::OnePole | ClassTag::BoundaryInX => {
            "the class contains the touching discs, so its J-envelope lies below E_B J, which is \
             upper semicontinuous with minimal growth; small perturbations of a member whose \
             boundary lies in the open set X stay in the class"
        }
        ClassTag::Affine => "J vanishes on polynomial discs, so the envelope is 0 wherever a member exists",
        ClassTag::AllProjective => {
            "the class contains the touching discs and the constants, so its J-envelope is bounded \
             by E_B J"
        }
    }
}

/// Exhibit a member at each sampled centre, check f(T) ⊂ X for it and
/// whether constants at centres in X are admitted.
pub fn validate_disc_class(class: &DiscClass, x: &Domain, sample: &[ComplexVector]) -> ClassReport {
    let field = EbjField::new(x, 0);
    let mut checks = Vec::with_capacity(sample.len());
    for z in sample {
        if z.check_dim(x.dim()).is_err() {
            checks.push(CentreCheck {
                centre: z.clone(),
                member: None,
                boundary_in_x: false,
                constant_admitted: None,
                note: "dimension mismatch".into(),
            });
            continue;
        }
        let inside = x.contains_unchecked(z);
        let (member, note) = if inside {
            (Some(RationalDisc::constant(z)), "constant disc".to_string())
        } else {
            match class.tag {
                ClassTag::Affine => (
                    Some(RationalDisc::constant(z)),
                    "polynomial discs satisfy f(0) = ∫ f dσ, so f(T) cannot stay in a convex \
                     neighbourhood of X missing z; the constant disc is tried"
                        .to_string(),
                ),
                _ => {
                    let (w, d) = field.minimizer(z);
                    let mut found = None;
                    let mut delta = 1e-6;
                    while delta < 0.5 && found.is_none() {
                        if let Ok(f) = make_touching_disc(z, &w, d * (1.0 - delta)) {
                            if verify_inside(&f, x, VERIFY_NODES).0 {
                                found = Some(f);
                            }
                        }
                        delta *= 10.0;
                    }
                    match found {
                        Some(f) => (Some(f), "touching disc about the best inscribed ball".to_string()),
                        None => (None, "no touching disc passed the boundary check".to_string()),
                    }
                }
            }
        };
        let boundary_in_x = member.as_ref().is_some_and(|f| verify_inside(f, x, VERIFY_NODES).0);
        checks.push(CentreCheck {
            centre: z.clone(),
            member: member.as_ref().map(DiscSpec::from),
            boundary_in_x,
            constant_admitted: inside.then_some(true),
            note,
        });
    }
    let failures = checks
        .iter()
        .filter(|c| !c.boundary_in_x || c.constant_admitted == Some(false))
        .count();
    ClassReport {
        class: *class,
        checks,
        failures,
        property4: property4_note(class.tag).to_string(),
    }
}

//! Reference results for the MNIST 200/45 experiment, in percent.
//! Final values are indexed by iteration budget 50, 100, 150.

use super::Method;
use crate::classifiers::ClassifierKind;

pub struct ReferenceCell {
    pub initial: f64,
    pub finals: [f64; 3],
}

const fn cell(initial: f64, finals: [f64; 3]) -> ReferenceCell {
    ReferenceCell { initial, finals }
}

/// `[kind][method][size]` with kinds NN, SVM, RF; methods GA, GA with
/// elitism, SA; sizes 50, 100.
const TABLE: [[[ReferenceCell; 2]; 3]; 3] = [
    [
        [cell(11.0, [12.7, 16.5, 16.7]), cell(13.5, [13.5, 14.0, 18.0])],
        [cell(12.5, [20.0, 15.2, 19.4]), cell(13.0, [15.0, 18.5, 17.5])],
        [cell(13.0, [8.2, 12.2, 11.0]), cell(9.4, [9.4, 10.6, 12.6])],
    ],
    [
        [cell(11.4, [16.2, 15.2, 17.8]), cell(13.4, [16.6, 18.8, 15.4])],
        [cell(11.6, [17.0, 18.4, 17.8]), cell(12.6, [18.2, 19.8, 20.4])],
        [cell(8.2, [7.8, 8.2, 11.0]), cell(9.4, [9.4, 10.6, 12.6])],
    ],
    [
        [cell(11.4, [14.2, 16.2, 15.4]), cell(14.4, [12.6, 15.8, 16.6])],
        [cell(11.5, [17.5, 19.7, 16.7]), cell(12.6, [17.0, 17.0, 17.8])],
        [cell(13.2, [10.6, 8.8, 9.2]), cell(10.6, [12.2, 10.4, 11.0])],
    ],
];

/// (initial, final) reference accuracy in percent, if the cell was reported.
pub fn reference(kind: ClassifierKind, method: Method, size: usize, iterations: usize) -> Option<(f64, f64)> {
    let k = match kind {
        ClassifierKind::Mlp => 0,
        ClassifierKind::Svm => 1,
        ClassifierKind::Rf => 2,
        ClassifierKind::Centroid => return None,
    };
    let m = match method {
        Method::Ga => 0,
        Method::GaElitism => 1,
        Method::Sa => 2,
    };
    let s = match size {
        50 => 0,
        100 => 1,
        _ => return None,
    };
    let i = match iterations {
        50 => 0,
        100 => 1,
        150 => 2,
        _ => return None,
    };
    let c = &TABLE[k][m][s];
    Some((c.initial, c.finals[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert_eq!(reference(ClassifierKind::Mlp, Method::GaElitism, 50, 150), Some((12.5, 19.4)));
        assert_eq!(reference(ClassifierKind::Svm, Method::GaElitism, 100, 150), Some((12.6, 20.4)));
        assert_eq!(reference(ClassifierKind::Svm, Method::Sa, 50, 50), Some((8.2, 7.8)));
        assert_eq!(reference(ClassifierKind::Rf, Method::Ga, 100, 50), Some((14.4, 12.6)));
        assert_eq!(reference(ClassifierKind::Centroid, Method::Ga, 50, 50), None);
        assert_eq!(reference(ClassifierKind::Mlp, Method::Ga, 75, 50), None);
    }

    #[test]
    fn ranges() {
        let mut finals = Vec::new();
        let mut initials = Vec::new();
        for kind in ClassifierKind::EXPERIMENT {
            for method in Method::ALL {
                for size in [50, 100] {
                    for it in [50, 100, 150] {
                        let (i, f) = reference(kind, method, size, it).unwrap();
                        initials.push(i);
                        finals.push(f);
                    }
                }
            }
        }
        let span = |v: &[f64]| (v.iter().cloned().fold(f64::MAX, f64::min), v.iter().cloned().fold(0.0, f64::max));
        assert_eq!(span(&finals), (7.8, 20.4));
        assert_eq!(span(&initials), (8.2, 14.4));
    }
}

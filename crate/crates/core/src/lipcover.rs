//! Covering a finite space by Lipschitz-1 images of another, computed exactly
//! on small instances.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::metric::Metric;
use crate::setcover::{min_set_cover, BitSet};
use crate::ultra::MapTable;

pub const MAX_MAPS: u64 = 1_000_000;
pub const MAX_FAMILY: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LipCoverError {
    #[error("search space too large: {what} is {size}, limit {limit}")]
    SearchSpaceTooLarge { what: &'static str, size: u64, limit: u64 },
    #[error("domain space is empty")]
    EmptyDomain,
}

/// A distinct maximal image set and the lexicographically least map
/// producing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageSet {
    pub members: Vec<usize>,
    pub map: MapTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverWitness {
    pub k: usize,
    pub maps: Vec<MapTable>,
    pub images: Vec<Vec<usize>>,
}

fn search_size(a: usize, b: usize) -> u64 {
    let mut size: u64 = 1;
    for _ in 0..a {
        size = size.saturating_mul(b as u64);
        if size > MAX_MAPS {
            return size;
        }
    }
    size
}

/// All inclusion-maximal images of Lipschitz-1 maps `A -> B`, ordered by
/// decreasing size then by members.
pub fn lip1_image_family<A: Metric + ?Sized, B: Metric + ?Sized>(a: &A, b: &B) -> Result<Vec<ImageSet>, LipCoverError> {
    let (na, nb) = (a.len(), b.len());
    if na == 0 {
        return Err(LipCoverError::EmptyDomain);
    }
    let size = search_size(na, nb);
    if size > MAX_MAPS {
        return Err(LipCoverError::SearchSpaceTooLarge { what: "|B|^|A|", size, limit: MAX_MAPS });
    }
    // maps with a smaller first image are lexicographically smaller, so a
    // merge in `first` order keeps the least witness per image
    let parts: Vec<Vec<(BitSet, Vec<usize>)>> = (0..nb)
        .into_par_iter()
        .map(|first| {
            let mut found = Vec::new();
            let mut seen = HashSet::new();
            let mut map = vec![first];
            extend_maps(a, b, &mut map, &mut seen, &mut found);
            found
        })
        .collect();
    let mut witness: HashMap<BitSet, Vec<usize>> = HashMap::new();
    let mut order = Vec::new();
    for (image, map) in parts.into_iter().flatten() {
        if !witness.contains_key(&image) {
            order.push(image.clone());
            witness.insert(image, map);
        }
    }
    let maximal: Vec<&BitSet> = order
        .iter()
        .filter(|s| !order.iter().any(|t| t != *s && s.is_subset(t)))
        .collect();
    let mut family: Vec<ImageSet> = maximal
        .into_iter()
        .map(|s| ImageSet { members: s.iter().collect(), map: MapTable { image: witness[s].clone() } })
        .collect();
    family.sort_by(|x, y| y.members.len().cmp(&x.members.len()).then_with(|| x.members.cmp(&y.members)));
    Ok(family)
}

fn extend_maps<A: Metric + ?Sized, B: Metric + ?Sized>(
    a: &A,
    b: &B,
    map: &mut Vec<usize>,
    seen: &mut HashSet<BitSet>,
    found: &mut Vec<(BitSet, Vec<usize>)>,
) {
    let i = map.len();
    if i == a.len() {
        let mut image = BitSet::new(b.len());
        for &y in map.iter() {
            image.insert(y);
        }
        if seen.insert(image.clone()) {
            found.push((image, map.clone()));
        }
        return;
    }
    for y in 0..b.len() {
        let fits = map.iter().enumerate().all(|(j, &fy)| fy == y || b.dist(fy, y) <= a.dist(j, i));
        if fits {
            map.push(y);
            extend_maps(a, b, map, seen, found);
            map.pop();
        }
    }
}

/// Minimal number of Lipschitz-1 images of `a` whose union is `b`, with
/// witness maps.
pub fn f_cover_number<A: Metric + ?Sized, B: Metric + ?Sized>(a: &A, b: &B) -> Result<CoverWitness, LipCoverError> {
    let family = lip1_image_family(a, b)?;
    if family.len() > MAX_FAMILY {
        return Err(LipCoverError::SearchSpaceTooLarge {
            what: "image family",
            size: family.len() as u64,
            limit: MAX_FAMILY as u64,
        });
    }
    let nb = b.len();
    let sets: Vec<BitSet> = family
        .iter()
        .map(|f| {
            let mut s = BitSet::new(nb);
            for &y in &f.members {
                s.insert(y);
            }
            s
        })
        .collect();
    let chosen = min_set_cover(nb, &sets).expect("singleton images cover B");
    Ok(CoverWitness {
        k: chosen.len(),
        maps: chosen.iter().map(|&c| family[c].map.clone()).collect(),
        images: chosen.iter().map(|&c| family[c].members.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PointCloud;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::line(xs.to_vec()).unwrap()
    }

    #[test]
    fn singleton_domain() {
        let a = line(&[0.0]);
        let b = line(&[0.0, 1.0, 5.0]);
        let fam = lip1_image_family(&a, &b).unwrap();
        let mut members: Vec<Vec<usize>> = fam.iter().map(|f| f.members.clone()).collect();
        members.sort();
        assert_eq!(members, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(f_cover_number(&a, &b).unwrap().k, 3);
    }

    #[test]
    fn isometric_pair() {
        let a = line(&[0.0, 1.0]);
        let fam = lip1_image_family(&a, &a).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].members, vec![0, 1]);
        assert_eq!(fam[0].map.image, vec![0, 1]);
        assert_eq!(f_cover_number(&a, &a).unwrap().k, 1);
    }

    #[test]
    fn stretched_target() {
        let a = line(&[0.0, 1.0]);
        let b = line(&[0.0, 2.0]);
        let fam = lip1_image_family(&a, &b).unwrap();
        assert!(fam.iter().all(|f| f.members.len() == 1));
        let w = f_cover_number(&a, &b).unwrap();
        assert_eq!(w.k, 2);
        assert_eq!(w.images, vec![vec![0], vec![1]]);
        assert_eq!(w.maps[0].image, vec![0, 0]);
    }

    #[test]
    fn witnesses_are_lipschitz_and_cover() {
        let a = line(&[0.0, 1.0, 2.5]);
        let b = line(&[0.0, 0.5, 1.4, 2.0, 3.1]);
        let w = f_cover_number(&a, &b).unwrap();
        let mut covered = vec![false; b.len()];
        for (map, image) in w.maps.iter().zip(&w.images) {
            let check = crate::ultra::verify_lipschitz(&a, &b, map, 1.0).unwrap();
            assert!(check.holds);
            let mut got = map.image.clone();
            got.sort();
            got.dedup();
            assert_eq!(&got, image);
            for &y in image {
                covered[y] = true;
            }
        }
        assert!(covered.iter().all(|&c| c));
        assert!(w.k <= b.len());
    }

    #[test]
    fn caps() {
        let a = line(&(0..7).map(f64::from).collect::<Vec<_>>());
        let b = line(&(0..8).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(lip1_image_family(&a, &b), Err(LipCoverError::SearchSpaceTooLarge { .. })));
    }
}

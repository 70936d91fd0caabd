//! The coloured three-to-one extension.

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::extension::copy_paste::{Construction, CopyPasteSpec, ExtensionTriple};
use crate::seglist::SourceList;

/// Three copies per vertex and a fourth of vertex 0. Minimal edges start at
/// that fourth copy, maximal ones at copy 0, the fourth copy cycles its
/// sources mod 3, thick edges keep the copy index and thin edges send copies
/// 0 and 1 to copy 0 and copy 2 to copy 1.
pub fn three_to_one_spec(d: &Diagram) -> Result<CopyPasteSpec> {
    if !d.has_normalized_sources() {
        return Err(Error::Precondition(
            "(a): minimal edges must share the source vertex 0 on every level".into(),
        ));
    }
    let mut spec = CopyPasteSpec::identity(d);
    for n in 1..=d.depth() {
        spec.copy_counts[n] = (0..d.level_size(n)).map(|l| if l == 0 { 4 } else { 3 }).collect();
    }
    for l in 0..d.level_size(1) {
        spec.source_copy[0][l] = vec![SourceList::run(0, d.r(0, l)); spec.copy_counts[1][l]];
    }
    for n in 1..d.depth() {
        for l in 0..d.level_size(n + 1) {
            let r = d.r(n, l);
            let m = d.thick_count(n, l).ok_or_else(|| {
                Error::Precondition(format!("edges into vertex {l} at level {} are not coloured", n + 1))
            })?;
            let mut per_copy: Vec<SourceList> = (0..3)
                .map(|j| {
                    let mut s = SourceList::run(3, 1);
                    s.push_run(j, m);
                    s.push_run(if j == 2 { 1 } else { 0 }, r - 2 - m);
                    s.push_run(0, 1);
                    s
                })
                .collect();
            if l == 0 {
                per_copy.push(d.incoming(n, 0).occurrence_index(3).with_ends(3, 0));
            }
            spec.source_copy[n][l] = per_copy;
        }
    }
    Ok(spec)
}

pub fn build_three_to_one(coloured: &Diagram) -> Result<ExtensionTriple> {
    let spec = three_to_one_spec(coloured)?;
    ExtensionTriple::new(coloured.clone(), spec, Construction::ThreeToOne)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seglist::ClassList;

    #[test]
    fn copy_counts_and_uncoloured_rejection() {
        let d = Diagram::from_lists(vec![vec![vec![0; 8]], vec![vec![0; 8]], vec![vec![0; 8]]]).unwrap();
        assert!(build_three_to_one(&d).is_err());
        let c = d
            .with_classes(vec![None, Some(vec![ClassList::coloured(8, 4)]), Some(vec![ClassList::coloured(8, 3)])])
            .unwrap();
        let t = build_three_to_one(&c).unwrap();
        assert_eq!(t.spec.copy_counts, vec![vec![1], vec![4], vec![4], vec![4]]);
        assert_eq!(t.spec.source_copy[1][0][2].to_vec(), vec![3, 2, 2, 2, 2, 1, 1, 0]);
        assert_eq!(t.spec.source_copy[1][0][3].to_vec(), vec![3, 1, 2, 0, 1, 2, 0, 0]);
    }
}

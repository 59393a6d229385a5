use super::Segment;
use crate::raster::{Grid, Pixel, N4, N8};

/// Rim pixels of a segment: members with at least one 4-neighbor outside it
/// (the image border counts as outside).
///
/// Pixels are ordered by tracing: starting from the first unvisited rim pixel
/// in raster order, the walk steps to an unvisited 8-adjacent rim pixel,
/// preferring 4-adjacent ones, until the chain ends; then the next chain starts.
pub fn segment_boundary(seg: &Segment) -> Vec<Pixel> {
    let members: Vec<Pixel> = seg.members().collect();
    if members.is_empty() {
        return Vec::new();
    }
    let row0 = members.iter().map(|p| p.row).min().unwrap();
    let col0 = members.iter().map(|p| p.col).min().unwrap();
    let row1 = members.iter().map(|p| p.row).max().unwrap();
    let col1 = members.iter().map(|p| p.col).max().unwrap();
    // One-pixel margin so every neighbor lookup lands inside the local mask.
    let (w, h) = (col1 - col0 + 3, row1 - row0 + 3);
    let local = |p: Pixel| Pixel::new(p.row - row0 + 1, p.col - col0 + 1);
    let global = |p: Pixel| Pixel::new(p.row + row0 - 1, p.col + col0 - 1);

    let mut mask = Grid::filled(w, h, false);
    for &p in &members {
        mask[local(p)] = true;
    }
    let mut rim = Grid::filled(w, h, false);
    let mut count = 0;
    for &p in &members {
        let q = local(p);
        let outside = N4
            .iter()
            .any(|&(dr, dc)| !mask[mask.offset(q, dr, dc).expect("margin")]);
        if outside {
            rim[q] = true;
            count += 1;
        }
    }

    let mut ordered = Vec::with_capacity(count);
    let mut visited = Grid::filled(w, h, false);
    for start in 0..rim.len() {
        if !rim[start] || visited[start] {
            continue;
        }
        let mut cur = rim.pixel_of(start);
        visited[cur] = true;
        ordered.push(global(cur));
        loop {
            let next = N4
                .iter()
                .chain(N8.iter())
                .filter_map(|&(dr, dc)| rim.offset(cur, dr, dc))
                .find(|&q| rim[q] && !visited[q]);
            match next {
                Some(q) => {
                    visited[q] = true;
                    ordered.push(global(q));
                    cur = q;
                }
                None => break,
            }
        }
    }
    ordered
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn seg(pixels: Vec<Pixel>) -> Segment {
        Segment {
            id: 0,
            seed_of: pixels.clone(),
            pixels,
            extension: Vec::new(),
            boundary: Vec::new(),
        }
    }

    #[test]
    fn solid_block() {
        let pixels = (10..13).flat_map(|r| (20..23).map(move |c| Pixel::new(r, c))).collect();
        let b = segment_boundary(&seg(pixels));
        assert_eq!(b.len(), 8);
        assert!(!b.contains(&Pixel::new(11, 21)));
    }

    #[test]
    fn thin_line() {
        let pixels: Vec<Pixel> = (5..25).map(|c| Pixel::new(7, c)).collect();
        let b = segment_boundary(&seg(pixels.clone()));
        assert_eq!(b.len(), pixels.len());
        // Traced as one chain from the left end.
        assert_eq!(b, pixels);
    }

    #[test]
    fn block_with_hole() {
        let pixels = (10..20)
            .flat_map(|r| (10..20).map(move |c| Pixel::new(r, c)))
            .filter(|p| *p != Pixel::new(15, 15))
            .collect();
        let b = segment_boundary(&seg(pixels));
        let set: HashSet<_> = b.iter().copied().collect();
        assert_eq!(set.len(), b.len());
        // 36 outer rim pixels + 4 around the hole.
        assert_eq!(b.len(), 40);
    }

    #[test]
    fn image_border_counts_as_outside() {
        let pixels = (0..3).flat_map(|r| (0..3).map(move |c| Pixel::new(r, c))).collect();
        let b = segment_boundary(&seg(pixels));
        assert_eq!(b.len(), 8);
    }
}

//! Cutout and random grid shuffle.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::RngState;

/// Fills `num_holes` rectangles with zero. Each hole is centered on a
/// uniformly drawn pixel and clipped to the image.
pub fn cutout(img: &Image, num_holes: usize, hole_h: usize, hole_w: usize, rng: &mut RngState) -> Result<Image> {
    check_hole(img, hole_h, hole_w)?;
    let (h, w) = (img.height(), img.width());
    let corners: Vec<(usize, usize)> = (0..num_holes)
        .map(|_| {
            let cy = rng.below(h);
            let cx = rng.below(w);
            (cy.saturating_sub(hole_h / 2), cx.saturating_sub(hole_w / 2))
        })
        .collect();
    cutout_at(img, &corners, hole_h, hole_w)
}

/// Zeroes the `hole_h x hole_w` rectangles with the given top-left corners,
/// clipped to the image.
pub fn cutout_at(img: &Image, corners: &[(usize, usize)], hole_h: usize, hole_w: usize) -> Result<Image> {
    check_hole(img, hole_h, hole_w)?;
    let (h, w) = (img.height(), img.width());
    let mut data = img.data().to_vec();
    for &(top, left) in corners {
        for y in top.min(h)..(top + hole_h).min(h) {
            let row = y * w;
            data[(row + left.min(w)) * 3..(row + (left + hole_w).min(w)) * 3].fill(0);
        }
    }
    Ok(Image::from_raw(h, w, data))
}

fn check_hole(img: &Image, hole_h: usize, hole_w: usize) -> Result<()> {
    if hole_h == 0 || hole_w == 0 || hole_h > img.height() || hole_w > img.width() {
        return Err(Error::param(
            "hole size",
            format!(
                "{hole_h}x{hole_w} must be positive and fit in {}x{}",
                img.height(),
                img.width()
            ),
        ));
    }
    Ok(())
}

/// Tile rectangles of a `grid x grid` partition, row-major. The last row
/// and column absorb any remainder.
pub fn grid_tiles(h: usize, w: usize, grid: usize) -> Vec<(usize, usize, usize, usize)> {
    let bounds = |len: usize| -> Vec<(usize, usize)> {
        let step = len / grid;
        (0..grid)
            .map(|i| (i * step, if i + 1 == grid { len } else { (i + 1) * step }))
            .collect()
    };
    let rows = bounds(h);
    let cols = bounds(w);
    rows.iter()
        .flat_map(|&(y0, y1)| cols.iter().map(move |&(x0, x1)| (y0, x0, y1 - y0, x1 - x0)))
        .collect()
}

/// Permutes the tiles of a `grid x grid` partition. Tiles are only
/// exchanged with tiles of identical shape.
pub fn random_grid_shuffle(img: &Image, grid: usize, rng: &mut RngState) -> Result<Image> {
    check_grid(img, grid)?;
    let tiles = grid_tiles(img.height(), img.width(), grid);
    let mut perm: Vec<usize> = (0..tiles.len()).collect();
    let mut shapes: Vec<(usize, usize)> = Vec::new();
    for t in &tiles {
        if !shapes.contains(&(t.2, t.3)) {
            shapes.push((t.2, t.3));
        }
    }
    for shape in shapes {
        let members: Vec<usize> = (0..tiles.len()).filter(|&i| (tiles[i].2, tiles[i].3) == shape).collect();
        let mut shuffled = members.clone();
        rng.shuffle(&mut shuffled);
        for (dst, src) in members.into_iter().zip(shuffled) {
            perm[dst] = src;
        }
    }
    grid_shuffle_with(img, grid, &perm)
}

/// Destination tile `i` receives source tile `perm[i]`.
pub fn grid_shuffle_with(img: &Image, grid: usize, perm: &[usize]) -> Result<Image> {
    check_grid(img, grid)?;
    let (h, w) = (img.height(), img.width());
    let tiles = grid_tiles(h, w, grid);
    let mut seen = vec![false; tiles.len()];
    if perm.len() != tiles.len() {
        return Err(Error::param("perm", format!("expected {} entries", tiles.len())));
    }
    for (dst, &src) in perm.iter().enumerate() {
        if src >= tiles.len() || seen[src] {
            return Err(Error::param("perm", "not a permutation"));
        }
        seen[src] = true;
        if (tiles[dst].2, tiles[dst].3) != (tiles[src].2, tiles[src].3) {
            return Err(Error::param("perm", "tiles of different shape"));
        }
    }
    let src_data = img.data();
    let mut data = vec![0u8; src_data.len()];
    for (dst, &src) in perm.iter().enumerate() {
        let (dy, dx, th, tw) = tiles[dst];
        let (sy, sx, _, _) = tiles[src];
        for r in 0..th {
            let d = ((dy + r) * w + dx) * 3;
            let s = ((sy + r) * w + sx) * 3;
            data[d..d + tw * 3].copy_from_slice(&src_data[s..s + tw * 3]);
        }
    }
    Ok(Image::from_raw(h, w, data))
}

fn check_grid(img: &Image, grid: usize) -> Result<()> {
    if grid == 0 || grid > img.height() || grid > img.width() {
        return Err(Error::param(
            "grid",
            format!("{grid} must be in [1, min side {}]", img.height().min(img.width())),
        ));
    }
    Ok(())
}

//! Gradient-corrected bilinear demosaicing (Malvar, He & Cutler 2004).
//!
//! Each missing sample is the bilinear estimate plus a scaled Laplacian of
//! the channel measured at that site. All eight 5x5 kernels have a 1/8
//! normalization and unit DC gain. Samples outside the image are read by
//! mirroring about the edge pixel, which keeps the CFA phase intact.

use rayon::prelude::*;

use crate::image::{BayerImage, Cfa, ColorState, PlanarImage};

#[inline]
fn reflect(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    while i < 0 || i >= n {
        i = if i < 0 { -i } else { 2 * (n - 1) - i };
    }
    i as usize
}

struct Neighborhood<'a> {
    raw: &'a BayerImage,
    y: usize,
    x: usize,
    interior: bool,
}

impl Neighborhood<'_> {
    #[inline]
    fn at(&self, dy: isize, dx: isize) -> f32 {
        let (h, w) = (self.raw.height(), self.raw.width());
        if self.interior {
            let yy = (self.y as isize + dy) as usize;
            let xx = (self.x as isize + dx) as usize;
            self.raw.data()[yy * w + xx]
        } else {
            let yy = reflect(self.y as isize + dy, h);
            let xx = reflect(self.x as isize + dx, w);
            self.raw.data()[yy * w + xx]
        }
    }

    /// Green at a red or blue site.
    #[inline]
    fn green_at_rb(&self) -> f32 {
        let c = self.at(0, 0);
        let near = self.at(-1, 0) + self.at(1, 0) + self.at(0, -1) + self.at(0, 1);
        let far = self.at(-2, 0) + self.at(2, 0) + self.at(0, -2) + self.at(0, 2);
        (4.0 * c + 2.0 * near - far) * 0.125
    }

    /// Red at a blue site, or blue at a red site.
    #[inline]
    fn opposite_at_rb(&self) -> f32 {
        let c = self.at(0, 0);
        let diag = self.at(-1, -1) + self.at(-1, 1) + self.at(1, -1) + self.at(1, 1);
        let far = self.at(-2, 0) + self.at(2, 0) + self.at(0, -2) + self.at(0, 2);
        (6.0 * c + 2.0 * diag - 1.5 * far) * 0.125
    }

    /// Chroma at a green site whose same-colored neighbors sit left and right.
    #[inline]
    fn chroma_horizontal(&self) -> f32 {
        let c = self.at(0, 0);
        let side = self.at(0, -1) + self.at(0, 1);
        let diag = self.at(-1, -1) + self.at(-1, 1) + self.at(1, -1) + self.at(1, 1);
        let far_h = self.at(0, -2) + self.at(0, 2);
        let far_v = self.at(-2, 0) + self.at(2, 0);
        (5.0 * c + 4.0 * side - diag - far_h + 0.5 * far_v) * 0.125
    }

    /// Chroma at a green site whose same-colored neighbors sit above and below.
    #[inline]
    fn chroma_vertical(&self) -> f32 {
        let c = self.at(0, 0);
        let side = self.at(-1, 0) + self.at(1, 0);
        let diag = self.at(-1, -1) + self.at(-1, 1) + self.at(1, -1) + self.at(1, 1);
        let far_v = self.at(-2, 0) + self.at(2, 0);
        let far_h = self.at(0, -2) + self.at(0, 2);
        (5.0 * c + 4.0 * side - diag - far_v + 0.5 * far_h) * 0.125
    }

    fn rgb(&self) -> [f32; 3] {
        let c = self.at(0, 0);
        match Cfa::at(self.y, self.x) {
            Cfa::Red => [c, self.green_at_rb(), self.opposite_at_rb()],
            Cfa::Blue => [self.opposite_at_rb(), self.green_at_rb(), c],
            Cfa::GreenR => [self.chroma_horizontal(), c, self.chroma_vertical()],
            Cfa::GreenB => [self.chroma_vertical(), c, self.chroma_horizontal()],
        }
    }
}

/// Interpolates the two missing colors at every site. Measured samples pass
/// through unchanged; the output is not clipped.
pub fn demosaic(raw: &BayerImage) -> PlanarImage {
    let (h, w) = (raw.height(), raw.width());
    let n = h * w;
    let mut data = vec![0.0f32; 3 * n];
    let (r, rest) = data.split_at_mut(n);
    let (g, b) = rest.split_at_mut(n);

    r.par_chunks_mut(w)
        .zip(g.par_chunks_mut(w))
        .zip(b.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, ((r_row, g_row), b_row))| {
            let row_interior = y >= 2 && y + 2 < h;
            for x in 0..w {
                let hood = Neighborhood {
                    raw,
                    y,
                    x,
                    interior: row_interior && x >= 2 && x + 2 < w,
                };
                let [rv, gv, bv] = hood.rgb();
                r_row[x] = rv;
                g_row[x] = gv;
                b_row[x] = bv;
            }
        });

    PlanarImage::new(h, w, data, ColorState::CameraRgb).expect("buffer sized for 3 planes")
}

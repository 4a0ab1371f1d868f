//! Lattice shapes: convexity, perimeter and area, convexification and the
//! inscribed-square guarantee.

use gmrf_regions::geometry::{min_inscribed_square_side, Cell, Polyomino};

fn show(name: &str, p: &Polyomino) {
    let (per, area) = p.perimeter_area(1.0);
    let side = min_inscribed_square_side(area, per).unwrap();
    println!(
        "{name:>10}: {} cells, convex {}, P {per}, A {area}, box P {}, inscribed side >= {side:.3}",
        p.len(),
        p.is_convex(),
        p.circumscribed_perimeter()
    );
}

fn main() -> gmrf_regions::Result<()> {
    let u_shape = Polyomino::new([(0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (2, 2)].map(|(i, j)| Cell::new(i, j)))?;
    let strip = Polyomino::rectangle(Cell::new(0, 0), 10, 1)?;
    show("U", &u_shape);
    show("hull of U", &u_shape.convexify());
    show("strip", &strip);
    Ok(())
}

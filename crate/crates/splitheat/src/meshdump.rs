//! Plain-text mesh dump for debugging.
//!
//! ```text
//! dim nv nc
//! x y [z]          (nv lines)
//! i j k [l]        (nc lines)
//! b0 b1 ...        (boundary mask, 0/1)
//! ```

use std::io::Write;

use splitheat_core::Mesh;

pub fn write_mesh<W: Write>(mut out: W, mesh: &Mesh) -> std::io::Result<()> {
    writeln!(out, "{} {} {}", mesh.dim(), mesh.num_vertices(), mesh.num_cells())?;
    for v in mesh.vertices() {
        let line: Vec<String> = v.iter().map(|c| format!("{c:?}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    for c in mesh.cells() {
        let line: Vec<String> = c.iter().map(usize::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    let mask: Vec<&str> = mesh.boundary_mask().iter().map(|&b| if b { "1" } else { "0" }).collect();
    writeln!(out, "{}", mask.join(" "))
}

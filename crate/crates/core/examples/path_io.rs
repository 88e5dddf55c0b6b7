//! Storing sample paths as JSON lines or compact binary.

use std::io::Cursor;

use sle_rho::io::{params_hash, read_binary, read_jsonl, write_binary, write_jsonl};
use sle_rho::process::{run_process, SleParams};
use sle_rho::{Domain, Point};

fn main() -> sle_rho::Result<()> {
    let params = SleParams::new(Domain::Strip, 4.0, Point::real(0.0))
        .with_force_point(Point::PlusInfinity, 1.0)
        .with_time(0.1, 1e-3)
        .with_seed(9);
    let path = run_process(&params)?;

    let mut text = Vec::new();
    write_jsonl(&path, &mut text)?;
    let mut bytes = Vec::new();
    write_binary(&path, &mut bytes)?;
    println!("{} records: {} bytes as JSON lines, {} as binary", path.len(), text.len(), bytes.len());
    println!("first line: {}", String::from_utf8_lossy(text.split(|&b| b == b'\n').next().unwrap()));
    println!("params hash {:016x}", params_hash(&params)?);

    assert_eq!(read_jsonl(Cursor::new(&text))?, path);
    assert_eq!(read_binary(Cursor::new(&bytes))?, path);
    println!("both formats round-trip exactly");
    Ok(())
}

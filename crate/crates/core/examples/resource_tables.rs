//! Qubit and depth tables for color- and surface-code gates, and CNOT qubit
//! counts under different syndrome-qubit allocations.
//!
//! Usage: cargo run --example resource_tables

use colorsurg::resources::{cnot_table_csv, gate_table_csv, Family};

fn main() -> colorsurg::Result<()> {
    print!("{}", gate_table_csv(&[Family::Color, Family::Surface], &[3, 5, 7])?);
    println!();
    print!("{}", cnot_table_csv(&[3, 5, 7, 9, 11])?);
    Ok(())
}

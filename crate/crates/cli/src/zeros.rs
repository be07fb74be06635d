use std::io::Write;

use cms_core::{hermite_zeros, laguerre_zeros};

use crate::args::{FamilyArg, ZerosArgs};
use crate::format::g17;
use crate::CliError;

pub fn run<W: Write>(args: &ZerosArgs, out: &mut W) -> Result<(), CliError> {
    if args.degree == 0 {
        return Err(CliError::Usage("degree must be at least 1".into()));
    }
    let set = match args.family {
        FamilyArg::Hermite => hermite_zeros(args.degree)?,
        FamilyArg::Laguerre => laguerre_zeros(args.degree, args.alpha)
            .map_err(|e| CliError::Usage(e.to_string()))?,
    };
    for z in &set.zeros {
        // Adding zero turns a negative zero into a positive one.
        writeln!(out, "{}", g17(z + 0.0))?;
    }
    if args.residual {
        let r = set.residual()?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        writeln!(out, "residual,{}", g17(r))?;
    }
    Ok(())
}

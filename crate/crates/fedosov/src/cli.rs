//! Command-line surface.
//!
//! Results go to the output stream, diagnostics to the error stream. Exit
//! codes: 0 success, 1 validation failure, 2 parse/usage error, 3 internal
//! failure. Identical inputs produce byte-identical output.

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use crate::expr::parse_to_jet;
use crate::geometry::{symplectize, Connection, SymplecticStructure};
use crate::jet::Jet;
use crate::manifold::{load_spec, LoadedManifold};
use crate::quantize::{moyal_reference, CoefficientSeries, FedosovConnection};
use crate::render::{
    default_names, element_text, jet_polynomial, series_json, series_lines, ElementJson,
};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "fedosov",
    version,
    about = "Exact star products on symplectic coordinate patches"
)]
struct Cli {
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Override the jet truncation order
    #[arg(long, global = true, value_name = "J")]
    jet_order: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a manifold description file
    Check {
        /// Manifold description (JSON)
        spec: PathBuf,
    },
    /// Repair the connection into a torsion-free compatible one
    Symplectize { spec: PathBuf },
    /// Build the flat connection and dump its correction per degree
    Connection {
        spec: PathBuf,
        /// Truncation order of the Weyl-form algebra
        #[arg(long, value_name = "N")]
        order: u32,
        /// Repair the connection first
        #[arg(long)]
        symplectize: bool,
    },
    /// Lift a coefficient series to its flat section
    FlatSection {
        spec: PathBuf,
        /// Truncation order of the section
        #[arg(long, value_name = "N")]
        order: u32,
        /// Series entries c0,c1,... as expressions
        #[arg(
            short = 'f',
            value_name = "EXPR[,EXPR...]",
            value_delimiter = ',',
            required = true
        )]
        functions: Vec<String>,
        /// Repair the connection first
        #[arg(long)]
        symplectize: bool,
    },
    /// Star-multiply two functions through t^K
    Star {
        spec: PathBuf,
        /// Star-product order K
        #[arg(long, value_name = "K")]
        order: usize,
        /// Left factor
        #[arg(short = 'f', value_name = "EXPR")]
        f: String,
        /// Right factor
        #[arg(short = 'g', value_name = "EXPR")]
        g: String,
        /// Repair the connection first
        #[arg(long)]
        symplectize: bool,
    },
    /// Closed-form star product on the standard R^{2n} structure
    Moyal {
        /// Star-product order K
        #[arg(long, value_name = "K")]
        order: usize,
        #[arg(short = 'f', value_name = "EXPR")]
        f: String,
        #[arg(short = 'g', value_name = "EXPR")]
        g: String,
        /// Chart dimension 2n
        #[arg(long)]
        dim: usize,
    },
}

/// Parse and dispatch; never panics on user input.
pub fn run(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(error) => {
            return match error.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{error}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{error}");
                    2
                }
            };
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(error) => {
            let _ = writeln!(stderr, "error: {error}");
            error.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Check { spec } => check(spec, cli.jet_order, cli.json, out),
        Command::Symplectize { spec } => run_symplectize(spec, cli.jet_order, cli.json, out),
        Command::Connection {
            spec,
            order,
            symplectize,
        } => connection_dump(spec, *order, *symplectize, cli.jet_order, cli.json, out),
        Command::FlatSection {
            spec,
            order,
            functions,
            symplectize,
        } => flat_section(
            spec,
            *order,
            functions,
            *symplectize,
            cli.jet_order,
            cli.json,
            out,
        ),
        Command::Star {
            spec,
            order,
            f,
            g,
            symplectize,
        } => star(
            spec,
            *order,
            f,
            g,
            *symplectize,
            cli.jet_order,
            cli.json,
            out,
        ),
        Command::Moyal { order, f, g, dim } => {
            moyal(*order, f, g, *dim, cli.jet_order, cli.json, out)
        }
    }
}

const DEFAULT_CHECK_JET_ORDER: u32 = 6;

fn check(spec: &PathBuf, jet_order: Option<u32>, json: bool, out: &mut dyn Write) -> Result<()> {
    let loaded = load_spec(spec, jet_order, DEFAULT_CHECK_JET_ORDER)?;
    let connection_report = loaded
        .connection
        .as_ref()
        .map(|c| (c.is_torsion_free(), c.preserves_omega()));
    if json {
        let value = json!({
            "valid": true,
            "dimension": loaded.structure.dim(),
            "coordinates": loaded.coordinates,
            "jet_order": loaded.jet_order,
            "omega_constant": loaded.structure.is_constant(),
            "connection": connection_report.map(|(torsion_free, preserves)| json!({
                "torsion_free": torsion_free,
                "preserves_omega": preserves,
            })),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
    } else {
        writeln!(
            out,
            "ok: dimension {}, coordinates {}, jet order {}",
            loaded.structure.dim(),
            loaded.coordinates.join(" "),
            loaded.jet_order
        )?;
        writeln!(
            out,
            "omega: antisymmetric, closed, nondegenerate at the basepoint{}",
            if loaded.structure.is_constant() {
                " (constant)"
            } else {
                ""
            }
        )?;
        match connection_report {
            None => writeln!(out, "connection: absent (zero connection assumed)")?,
            Some((torsion_free, preserves)) => writeln!(
                out,
                "connection: present, torsion-free: {}, preserves omega: {}",
                if torsion_free { "yes" } else { "no" },
                if preserves { "yes" } else { "no" }
            )?,
        }
    }
    Ok(())
}

fn base_connection(loaded: &LoadedManifold) -> Connection {
    loaded
        .connection
        .clone()
        .unwrap_or_else(|| Connection::zero(&loaded.structure))
}

/// The connection a pipeline command will actually use.
fn resolve_connection(loaded: &LoadedManifold, repair: bool) -> Result<Connection> {
    let connection = base_connection(loaded);
    if repair {
        return symplectize(&connection, &loaded.structure);
    }
    if !connection.is_torsion_free() || !connection.preserves_omega() {
        return Err(Error::validation(
            "connection is not torsion-free symplectic; pass --symplectize \
             or run the symplectize command first",
        ));
    }
    Ok(connection)
}

fn run_symplectize(
    spec: &PathBuf,
    jet_order: Option<u32>,
    json: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let loaded = load_spec(spec, jet_order, DEFAULT_CHECK_JET_ORDER)?;
    let fixed = symplectize(&base_connection(&loaded), &loaded.structure)?;
    let dim = loaded.structure.dim();
    let mut entries: Vec<(String, String)> = Vec::new();
    for k in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                let jet = &fixed.christoffel()[k][i][j];
                if jet.is_zero() {
                    continue;
                }
                entries.push((
                    format!("{},{},{}", k + 1, i + 1, j + 1),
                    jet_polynomial(jet, &loaded.coordinates),
                ));
            }
        }
    }
    if json {
        let map: serde_json::Map<String, serde_json::Value> = entries
            .iter()
            .map(|(key, value)| (key.clone(), serde_json::Value::String(value.clone())))
            .collect();
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&json!({ "christoffel": map }))?
        )?;
    } else if entries.is_empty() {
        writeln!(out, "Gamma = 0")?;
    } else {
        for (key, value) in entries {
            writeln!(out, "Gamma[{key}] = {value}")?;
        }
    }
    Ok(())
}

fn connection_dump(
    spec: &PathBuf,
    order: u32,
    repair: bool,
    jet_order: Option<u32>,
    json: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let loaded = load_spec(spec, jet_order, order + 2)?;
    let connection = resolve_connection(&loaded, repair)?;
    let fedosov = FedosovConnection::build(&connection, &loaded.structure, order)?;
    if json {
        let components: Vec<serde_json::Value> = (3..=order)
            .map(|degree| {
                let element = fedosov
                    .components()
                    .get(&degree)
                    .map(ElementJson::from)
                    .map(|dto| serde_json::to_value(dto))
                    .transpose()?
                    .unwrap_or(serde_json::Value::Null);
                Ok(json!({ "degree": degree, "element": element }))
            })
            .collect::<Result<_>>()?;
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&json!({
                "order": order,
                "jet_order": loaded.jet_order,
                "components": components,
            }))?
        )?;
    } else {
        writeln!(out, "order {}, jet order {}", order, loaded.jet_order)?;
        for degree in 3..=order {
            match fedosov.components().get(&degree) {
                Some(element) => writeln!(
                    out,
                    "rho[{degree}] = {}",
                    element_text(element, &loaded.coordinates)
                )?,
                None => writeln!(out, "rho[{degree}] = 0")?,
            }
        }
    }
    Ok(())
}

fn flat_section(
    spec: &PathBuf,
    order: u32,
    functions: &[String],
    repair: bool,
    jet_order: Option<u32>,
    json: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let loaded = load_spec(spec, jet_order, order + 2)?;
    let connection = resolve_connection(&loaded, repair)?;
    let dim = loaded.structure.dim();
    let entries = functions
        .iter()
        .map(|source| parse_to_jet(source, &loaded.coordinates, dim, loaded.jet_order))
        .collect::<Result<Vec<Jet>>>()?;
    let series = CoefficientSeries::from_real(entries)?;
    let fedosov = FedosovConnection::build(&connection, &loaded.structure, order)?;
    let section = fedosov.quantize(&series)?;
    if json {
        let components: Vec<serde_json::Value> = (0..=order)
            .map(|degree| {
                let part = section.component(degree);
                let element = if part.is_zero() {
                    serde_json::Value::Null
                } else {
                    serde_json::to_value(ElementJson::from(&part))?
                };
                Ok(json!({ "degree": degree, "element": element }))
            })
            .collect::<Result<_>>()?;
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&json!({
                "order": order,
                "jet_order": loaded.jet_order,
                "components": components,
            }))?
        )?;
    } else {
        writeln!(out, "order {}, jet order {}", order, loaded.jet_order)?;
        for degree in 0..=order {
            let part = section.component(degree);
            if part.is_zero() {
                writeln!(out, "A[{degree}] = 0")?;
            } else {
                writeln!(
                    out,
                    "A[{degree}] = {}",
                    element_text(&part, &loaded.coordinates)
                )?;
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn star(
    spec: &PathBuf,
    order: usize,
    f: &str,
    g: &str,
    repair: bool,
    jet_order: Option<u32>,
    json: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let default_jet_order = 2 * order as u32 + 2;
    let loaded = load_spec(spec, jet_order, default_jet_order)?;
    let connection = resolve_connection(&loaded, repair)?;
    let dim = loaded.structure.dim();
    let a = CoefficientSeries::from_function(parse_to_jet(
        f,
        &loaded.coordinates,
        dim,
        loaded.jet_order,
    )?);
    let b = CoefficientSeries::from_function(parse_to_jet(
        g,
        &loaded.coordinates,
        dim,
        loaded.jet_order,
    )?);
    let weyl_order = (2 * order as u32).max(3);
    let fedosov = FedosovConnection::build(&connection, &loaded.structure, weyl_order)?;
    let product = fedosov.star(&a, &b, order)?;
    emit_series(&product, &loaded.coordinates, json, out)
}

fn moyal(
    order: usize,
    f: &str,
    g: &str,
    dim: usize,
    jet_order: Option<u32>,
    json: bool,
    out: &mut dyn Write,
) -> Result<()> {
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::validation(format!(
            "dim must be even and positive, got {dim}"
        )));
    }
    let jet_order = jet_order.unwrap_or(2 * order as u32 + 2);
    let structure = SymplecticStructure::darboux(dim / 2, jet_order);
    let names = default_names(dim);
    let a = CoefficientSeries::from_function(parse_to_jet(f, &names, dim, jet_order)?);
    let b = CoefficientSeries::from_function(parse_to_jet(g, &names, dim, jet_order)?);
    let product = moyal_reference(&a, &b, &structure, order)?;
    emit_series(&product, &names, json, out)
}

fn emit_series(
    series: &CoefficientSeries,
    names: &[String],
    json: bool,
    out: &mut dyn Write,
) -> Result<()> {
    if json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&series_json(series, names))?
        )?;
    } else {
        for line in series_lines(series, names) {
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

use std::fmt::Write as _;
use std::path::PathBuf;

use fieldlabel_core::annotation::ClassMap;
use fieldlabel_core::prep::{augment_dataset, read_split_dir, write_split_dir, AugmentSpec, PrepError};

use crate::common::{invalid, parse_size, require_dir, require_output_dir, resolve_class_map, runtime, write, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Split directory with `images/` and `labels/` (usually `train/`).
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    /// Output split directory; also receives `augmentations.csv`.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Variants written per source image, next to the resized original.
    #[arg(long, default_value_t = 3)]
    variants: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output image size.
    #[arg(long, default_value = "640x640", value_name = "WxH", value_parser = parse_size)]
    size: (u32, u32),
    /// Saturation factor range, drawn from 1 ± value.
    #[arg(long, default_value_t = 0.25)]
    saturation: f64,
    #[arg(long, default_value_t = 0.15)]
    brightness: f64,
    #[arg(long, default_value_t = 0.10)]
    exposure: f64,
    /// Comma-separated class names (default: `data.yaml` next to or above `--in`).
    #[arg(long, value_name = "A,B,..", conflicts_with = "names")]
    classes: Option<String>,
    #[arg(long, value_name = "YAML")]
    names: Option<PathBuf>,
}

fn prep_error(e: PrepError) -> crate::common::CliError {
    match e {
        PrepError::Io { .. } | PrepError::Image { .. } => runtime(e),
        _ => invalid(e.to_string()),
    }
}

pub fn run(args: Args) -> CliResult<()> {
    require_dir(&args.input, "--in")?;
    require_output_dir(&args.out)?;
    let search = [args.input.clone(), args.input.join("..")];
    let class_map = resolve_class_map(args.classes.as_deref(), args.names.as_deref(), &search)?
        .unwrap_or_else(|| ClassMap::single("Plant"));
    let spec = AugmentSpec {
        variants_per_image: args.variants,
        saturation_range: args.saturation,
        brightness_range: args.brightness,
        exposure_range: args.exposure,
        target_size: args.size,
        seed: args.seed,
        ..AugmentSpec::default()
    };
    spec.validate().map_err(prep_error)?;
    let ds = read_split_dir(&args.input, &class_map).map_err(prep_error)?;
    if ds.is_empty() {
        return Err(invalid(format!("{} has no images", args.input.display())));
    }
    let out = augment_dataset(&ds, &spec).map_err(prep_error)?;
    write_split_dir(&out.dataset, &args.out).map_err(prep_error)?;

    let mut csv = String::from("source,name,op,saturation,brightness,exposure\n");
    for r in &out.records {
        let op = serde_json::to_value(r.op).map_err(runtime)?;
        let _ = writeln!(
            csv,
            "{},{},{},{:.6},{:.6},{:.6}",
            r.source,
            r.name,
            op.as_str().unwrap_or_default(),
            r.factors.saturation,
            r.factors.brightness,
            r.factors.exposure
        );
    }
    write(&args.out.join("augmentations.csv"), csv)?;
    println!("{} originals + {} variants written to {}", out.originals, out.variants, args.out.display());
    Ok(())
}

use std::path::PathBuf;

use fieldlabel_core::annotation::DatasetConfig;
use fieldlabel_core::prep::{
    collapse_classes, read_split_dir, resize_stretch, stratified_split, write_split_dir, Dataset, PrepError, SplitRatios,
};

use crate::common::{invalid, parse_size, require_dir, require_output_dir, resolve_class_map, runtime, write, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Dataset directory with `images/` and `labels/`.
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    /// Output directory; receives `train/`, `val/`, `test/` and `data.yaml`.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Comma-separated class names, in id order.
    #[arg(long, value_name = "A,B,..", conflicts_with = "names")]
    classes: Option<String>,
    /// Dataset descriptor to read class names from (default: `<in>/data.yaml`).
    #[arg(long, value_name = "YAML")]
    names: Option<PathBuf>,
    /// Relabel every box to one class.
    #[arg(long)]
    single_class: bool,
    /// Name of the single class.
    #[arg(long, default_value = "Plant", requires = "single_class")]
    name: String,
    /// Train, val and test fractions.
    #[arg(long, default_value = "0.7,0.15,0.15", value_name = "T,V,T")]
    split: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stretch every image to this size before splitting.
    #[arg(long, value_name = "WxH", value_parser = parse_size)]
    resize: Option<(u32, u32)>,
}

fn parse_ratios(s: &str) -> CliResult<SplitRatios> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| invalid(format!("--split {s:?}: expected three numbers")))?;
    let [train, val, test] = parts[..] else {
        return Err(invalid(format!("--split {s:?}: expected three numbers")));
    };
    SplitRatios::new(train, val, test).map_err(|e| invalid(e.to_string()))
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
    let ratios = parse_ratios(&args.split)?;
    let class_map = resolve_class_map(args.classes.as_deref(), args.names.as_deref(), &[args.input.clone()])?
        .ok_or_else(|| invalid("no class names: pass --classes or --names, or put data.yaml in the dataset"))?;

    let mut ds = read_split_dir(&args.input, &class_map).map_err(prep_error)?;
    if ds.is_empty() {
        return Err(invalid(format!("dataset {} has no images", args.input.display())));
    }
    if args.single_class {
        ds = collapse_classes(&ds, &args.name);
    }
    if let Some(size) = args.resize {
        let items = ds.items.iter().map(|item| resize_stretch(item, size)).collect::<Result<_, _>>().map_err(prep_error)?;
        ds = Dataset::new(ds.class_map.clone(), items).map_err(prep_error)?;
    }
    let outcome = stratified_split(&ds, ratios, args.seed).map_err(prep_error)?;
    for (name, split) in [("train", &outcome.train), ("val", &outcome.val), ("test", &outcome.test)] {
        write_split_dir(split, &args.out.join(name)).map_err(prep_error)?;
    }
    write(&args.out.join("data.yaml"), DatasetConfig::standard(ds.class_map.clone()).to_yaml())?;

    for w in &outcome.warnings {
        let class = w.class_id.map_or("background".to_string(), |c| ds.class_map.name(c).unwrap_or("?").to_string());
        eprintln!("warning: stratum {class} has only {} image(s); assigned to train first", w.items);
    }
    println!(
        "{} images, {} boxes -> train {} / val {} / test {} (seed {})",
        ds.len(),
        ds.box_count(),
        outcome.train.len(),
        outcome.val.len(),
        outcome.test.len(),
        args.seed
    );
    Ok(())
}

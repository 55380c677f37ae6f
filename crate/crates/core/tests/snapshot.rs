use std::fs::File;
use std::io::{BufReader, BufWriter};

use diracl2::field::{snapshot, CliffordField, Grid};

fn field() -> CliffordField {
    let g = Grid::new(2, vec![4, 3, 5], vec![-1.0, 0.0, 0.5], vec![1.0, 2.0, 1.5]).unwrap();
    CliffordField::from_fn(&g, |x, out| {
        for (a, o) in out.iter_mut().enumerate() {
            *o = (a as f64 + 1.0) * x[0] - x[1] * x[2] / 3.0;
        }
    })
}

#[test]
fn binary_and_csv_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = field();

    let bin = dir.path().join("u.bin");
    snapshot::write_binary(&f, BufWriter::new(File::create(&bin).unwrap())).unwrap();
    let back = snapshot::read_binary(BufReader::new(File::open(&bin).unwrap())).unwrap();
    assert_eq!(back, f);

    let csv = dir.path().join("u.csv");
    snapshot::write_csv(&f, BufWriter::new(File::create(&csv).unwrap())).unwrap();
    let back = snapshot::read_csv(BufReader::new(File::open(&csv).unwrap())).unwrap();
    assert_eq!(back, f);
}

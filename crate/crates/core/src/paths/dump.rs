use super::sde::PathRecord;
use crate::error::Result;
use std::io::Write;

/// One row per grid node: `t, X_1..X_d, B_1..B_d, QV_11..QV_dd, Y_1..Y_d`.
pub fn write_path_csv<W: Write>(record: &PathRecord, out: W) -> Result<()> {
    let d = record.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("X{i}")));
    header.extend((1..=d).map(|i| format!("B{i}")));
    for i in 1..=d {
        header.extend((1..=d).map(|j| format!("QV{i}{j}")));
    }
    header.extend((1..=d).map(|i| format!("Y{i}")));
    w.write_record(&header)?;
    for i in 0..=record.steps() {
        let mut row = vec![record.driver.time(i).to_string()];
        let drv = &record.driver;
        row.extend(drv.x_at(i).iter().map(f64::to_string));
        row.extend(drv.b_at(i).iter().map(f64::to_string));
        row.extend(drv.qv_at(i).iter().map(f64::to_string));
        row.extend(record.y_at(i).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per jump: `time, measure, u_1..u_d`.
pub fn write_events_csv<W: Write>(record: &PathRecord, out: W) -> Result<()> {
    let d = record.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string(), "measure".to_string()];
    header.extend((1..=d).map(|i| format!("u{i}")));
    w.write_record(&header)?;
    for ev in &record.driver.events {
        let mut row = vec![ev.time.to_string(), ev.measure.to_string()];
        row.extend(ev.mark.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

//! Static SVG Gantt charts: one lane per machine, one rectangle per job.
//! Within a lane, jobs are stacked by qubit offset so the lane height is the
//! machine's capacity.

use std::fmt::Write;

use crate::model::{Instance, Schedule, EPS};

const LEFT: f64 = 60.0;
const TOP: f64 = 20.0;
const WIDTH: f64 = 720.0;
const QUBIT_HEIGHT: f64 = 12.0;
const LANE_GAP: f64 = 16.0;
const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Lowest qubit offset free over `[start, completion)`, or 0 when none is.
fn offset_for(
    placed: &[(f64, f64, u32, u32)],
    start: f64,
    completion: f64,
    qubits: u32,
    capacity: u32,
) -> u32 {
    let busy: Vec<(u32, u32)> = placed
        .iter()
        .filter(|&&(b, c, _, _)| b < completion - EPS && start < c - EPS)
        .map(|&(_, _, off, q)| (off, off + q))
        .collect();
    (0..=capacity.saturating_sub(qubits))
        .find(|&off| busy.iter().all(|&(lo, hi)| off + qubits <= lo || off >= hi))
        .unwrap_or(0)
}

/// Renders the schedule; the output depends only on its inputs.
pub fn render_gantt(schedule: &Schedule, instance: &Instance) -> String {
    let span = if schedule.makespan > 0.0 {
        schedule.makespan
    } else {
        1.0
    };
    let scale = WIDTH / span;
    let mut lane_top = Vec::with_capacity(instance.machines.len());
    let mut y = TOP;
    for m in &instance.machines {
        lane_top.push(y);
        y += m.capacity as f64 * QUBIT_HEIGHT + LANE_GAP;
    }
    let height = y + 20.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" font-family="sans-serif" font-size="10">"#,
        LEFT + WIDTH + 20.0,
        height
    );
    for (k, m) in instance.machines.iter().enumerate() {
        let top = lane_top[k];
        let bottom = top + m.capacity as f64 * QUBIT_HEIGHT;
        let _ = writeln!(
            svg,
            r#"<text x="4" y="{:.1}">{}</text>"#,
            (top + bottom) / 2.0 + 3.0,
            escape(&m.id)
        );
        let _ = writeln!(
            svg,
            r##"<path d="M{LEFT:.1} {top:.1}H{:.1}V{bottom:.1}H{LEFT:.1}Z" fill="none" stroke="#999"/>"##,
            LEFT + WIDTH
        );
    }
    let mut entries: Vec<(usize, &crate::model::ScheduleEntry)> =
        schedule.entries.iter().enumerate().collect();
    entries.sort_by(|a, b| a.1.start.total_cmp(&b.1.start).then(a.0.cmp(&b.0)));
    let mut placed: Vec<Vec<(f64, f64, u32, u32)>> = vec![Vec::new(); instance.machines.len()];
    for (idx, e) in entries {
        let k = instance.machine_position(&e.machine).unwrap_or(0);
        let qubits = instance
            .job_position(&e.job)
            .map_or(1, |j| instance.jobs[j].qubits);
        let capacity = instance.machines.get(k).map_or(qubits, |m| m.capacity);
        let off = offset_for(&placed[k], e.start, e.completion, qubits, capacity);
        placed[k].push((e.start, e.completion, off, qubits));
        let x = LEFT + e.start * scale;
        let w = ((e.completion - e.start) * scale).max(1.0);
        let top = lane_top.get(k).copied().unwrap_or(TOP) + off as f64 * QUBIT_HEIGHT;
        let h = qubits as f64 * QUBIT_HEIGHT;
        let _ = writeln!(
            svg,
            r##"<rect x="{x:.2}" y="{top:.2}" width="{w:.2}" height="{h:.2}" fill="{}" stroke="#333"><title>{} [{}, {})</title></rect>"##,
            PALETTE[idx % PALETTE.len()],
            escape(&e.job),
            e.start,
            e.completion
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" fill="white">{}</text>"#,
            x + 2.0,
            top + h / 2.0 + 3.0,
            escape(&e.job)
        );
    }
    let axis = height - 12.0;
    let _ = writeln!(
        svg,
        r##"<line x1="{LEFT:.1}" y1="{axis:.1}" x2="{:.1}" y2="{axis:.1}" stroke="#333"/>"##,
        LEFT + WIDTH
    );
    let _ = writeln!(
        svg,
        r#"<text x="{LEFT:.1}" y="{:.1}">0</text><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
        axis + 10.0,
        LEFT + WIDTH,
        axis + 10.0,
        schedule.makespan
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{entry, instance};

    fn rects(svg: &str) -> usize {
        svg.matches("<rect").count()
    }

    #[test]
    fn one_job_one_rect() {
        let inst = instance(&[2], &[5], |_, _| 3.0, |_, _, _| 1.0, 10);
        let s = Schedule::from_entries(vec![entry("J1", "M1", 0.0, 4.0)]);
        let svg = render_gantt(&s, &inst);
        assert_eq!(rects(&svg), 1);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn concurrent_jobs_stack() {
        let inst = instance(&[2, 3], &[5], |_, _| 3.0, |_, _, _| 0.0, 10);
        let s = Schedule::from_entries(vec![entry("J1", "M1", 0.0, 3.0), entry("J2", "M1", 0.0, 3.0)]);
        let svg = render_gantt(&s, &inst);
        assert_eq!(rects(&svg), 2);
        // J2 sits above J1's two qubits.
        assert!(svg.contains(&format!(r#"y="{:.2}""#, TOP + 2.0 * QUBIT_HEIGHT)));
        assert_eq!(svg, render_gantt(&s, &inst));
    }
}

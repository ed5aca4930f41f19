//! Soundness runs spread over a thread pool. Seeds are fixed per world and
//! per query, so the report equals the sequential one.

use hai_core::soundness::{
    plan, run_job, sample_world, SoundnessError, SoundnessOptions, SoundnessReport, World,
};
use rayon::prelude::*;

pub fn run_worlds(worlds: &[World], opts: &SoundnessOptions) -> Result<SoundnessReport, SoundnessError> {
    let (jobs, level) = plan(worlds, opts)?;
    let per_world: Vec<Vec<_>> = worlds
        .par_iter()
        .enumerate()
        .map(|(wi, w)| {
            let data = sample_world(w, wi, opts)?;
            jobs.iter()
                .filter(|j| j.world == wi)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|job| run_job(w, &data, job, level, opts))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(SoundnessReport {
        outcomes: per_world.into_iter().flatten().collect(),
        level,
        worlds: worlds.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hai_core::soundness::{self, random_worlds};

    #[test]
    fn matches_sequential_driver() {
        let worlds = random_worlds(4, 4, 11);
        let opts = SoundnessOptions {
            n: 3000,
            alpha: 0.5,
            seed: 5,
            test_connected: true,
            ..SoundnessOptions::default()
        };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let parallel = pool.install(|| run_worlds(&worlds, &opts)).unwrap();
        assert_eq!(parallel, soundness::run_worlds(&worlds, &opts).unwrap());
    }
}

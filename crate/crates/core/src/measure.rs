//! The registry of per-word reading measures carried by the gaze export.
//!
//! Names match the export's column headers exactly. The order of [`Measure::ALL`]
//! is the column order of the export and of every gaze feature block.

use std::fmt;

/// Temporal group of a measure: which pass over the word it describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GazeGroup {
    Early,
    Medium,
    Late,
}

impl GazeGroup {
    pub const ALL: [GazeGroup; 3] = [GazeGroup::Early, GazeGroup::Medium, GazeGroup::Late];

    pub fn name(self) -> &'static str {
        match self {
            GazeGroup::Early => "EARLY",
            GazeGroup::Medium => "MEDIUM",
            GazeGroup::Late => "LATE",
        }
    }

    pub fn parse(s: &str) -> Option<GazeGroup> {
        GazeGroup::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
    }

    pub fn members(self) -> impl Iterator<Item = Measure> {
        Measure::ALL.into_iter().filter(move |m| m.group() == self)
    }
}

impl fmt::Display for GazeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a measure behaves when two regions are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    /// Counts, durations and percentages: summed.
    Sum,
    /// Skip, progressive-fixation flag and run indices: averaged.
    Mean,
}

macro_rules! measures {
    ($($variant:ident => $name:literal, $group:ident, $combine:ident, $trial:literal;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Measure {
            $($variant,)*
        }

        impl Measure {
            pub const ALL: [Measure; 26] = [$(Measure::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Measure::$variant => $name,)*
                }
            }

            pub fn group(self) -> GazeGroup {
                match self {
                    $(Measure::$variant => GazeGroup::$group,)*
                }
            }

            pub fn combine(self) -> Combine {
                match self {
                    $(Measure::$variant => Combine::$combine,)*
                }
            }

            /// Trial-level measures are constant over all words of a trial.
            pub fn is_trial_level(self) -> bool {
                match self {
                    $(Measure::$variant => $trial,)*
                }
            }
        }
    };
}

measures! {
    FirstRunFixationCount => "First_Run_Fixation_Count", Early, Sum, false;
    FirstRunFixationPct => "First_Run_Fixation_Pct", Early, Sum, false;
    FirstFixationDuration => "First_Fixation_Duration", Early, Sum, false;
    FirstFixationVisitedCount => "First_Fixation_Visited_Count", Early, Mean, false;
    FirstFixProgressive => "First_Fix_Progressive", Early, Mean, false;
    SecondRunFixationCount => "Second_Run_Fixation_Count", Medium, Sum, false;
    SecondRunFixationPct => "Second_Run_Fixation_Pct", Medium, Sum, false;
    SecondFixationDuration => "Second_Fixation_Duration", Medium, Sum, false;
    SecondFixationRun => "Second_Fixation_Run", Medium, Mean, false;
    GazeDuration => "Gaze_Duration", Medium, Sum, false;
    ThirdRunFixationCount => "Third_Run_Fixation_Count", Late, Sum, false;
    ThirdRunFixationPct => "Third_Run_Fixation_Pct", Late, Sum, false;
    ThirdFixationDuration => "Third_Fixation_Duration", Late, Sum, false;
    ThirdFixationRun => "Third_Fixation_Run", Late, Mean, false;
    LastFixationDuration => "Last_Fixation_Duration", Late, Sum, false;
    LastFixationRun => "Last_Fixation_Run", Late, Mean, false;
    GoPastTime => "Go_Past_Time", Late, Sum, false;
    SelectiveGoPastTime => "Selective_Go_Past_Time", Late, Sum, false;
    FixationCount => "Fixation_Count", Late, Sum, false;
    FixationPct => "Fixation_Pct", Late, Sum, false;
    TotalReadingTime => "Total_Reading_Time", Late, Sum, false;
    TotalReadingTimePct => "Total_Reading_Time_Pct", Late, Sum, false;
    TrialFixationCount => "Trial_Fixation_Count", Late, Sum, true;
    TrialTotalReadingTime => "Trial_Total_Reading_Time", Late, Sum, true;
    Spillover => "Spillover", Late, Sum, false;
    Skip => "Skip", Late, Mean, false;
}

impl Measure {
    pub const COUNT: usize = Measure::ALL.len();

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn is_percentage(self) -> bool {
        self.name().ends_with("_Pct")
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace subcal {

class CensoringSurvival;

// One subject in short format: observed time, censoring status, event type and
// time-constant covariates. event_type is only meaningful when status == 1.
struct SubjectRecord {
    int observed_time = 1;
    int status = 0;
    int event_type = 0;
    std::vector<double> covariates;

    bool is_type1_event() const { return status == 1 && event_type == 1; }
    bool is_competing_event() const { return status == 1 && event_type != 1; }
};

struct Dataset {
    std::vector<SubjectRecord> subjects;
    int k = 2;
    std::vector<std::string> covariate_names;

    std::size_t size() const { return subjects.size(); }
    std::size_t p() const { return covariate_names.size(); }
    bool empty() const { return subjects.empty(); }

    // Throws DataError naming the first offending subject.
    void validate() const;
};

// One (subject, time) row of the augmented binary dataset. covariates views
// the owning Dataset, which must outlive the record.
struct LongRecord {
    std::size_t subject_index = 0;
    int time = 1;
    int y = 0;
    double w = 1.0;
    std::span<const double> covariates;
};

/// Expands short-format subjects into binary outcome rows with subdistribution
/// weights. Type-1 subjects contribute rows 1..T with y = 1 at T; censored
/// subjects rows 1..T; competing-event subjects rows 1..k-1 with weight
/// G(t-1)/G(T-1) after T. Only times 1..k-1 are emitted and rows of zero
/// weight are dropped. `g_hat` may be null when the data hold no competing
/// events.
std::vector<LongRecord> expand_long(const Dataset& data, const CensoringSurvival* g_hat);

// Short format: header `time,status,event,<covariate names...>`.
// Lines starting with '#' are comments. k <= 0 takes k from the largest
// observed time (at least 2).
Dataset read_short_csv(const std::filesystem::path& path, int k);
Dataset parse_short_csv(std::string_view text, int k, std::string_view source = "<memory>");
void write_short_csv(const Dataset& data, const std::filesystem::path& path,
                     std::string_view header_comment = {});

// Long format: header `subject,time,y,w,<covariate names...>`.
void write_long_csv(const Dataset& data, const std::vector<LongRecord>& rows,
                    const std::filesystem::path& path, std::string_view header_comment = {});

// Largest observed time in the dataset (a default for k when none is given).
int max_observed_time(const Dataset& data);

}  // namespace subcal

#pragma once

#include "eeg/budget.hpp"
#include "eeg/error.hpp"
#include "eeg/guard.hpp"
#include "eeg/io/config_file.hpp"
#include "eeg/io/prompt_file.hpp"
#include "eeg/io/prototype_file.hpp"
#include "eeg/io/trace_file.hpp"
#include "eeg/layer_accuracy.hpp"
#include "eeg/metrics.hpp"
#include "eeg/mlp.hpp"
#include "eeg/pca.hpp"
#include "eeg/pool.hpp"
#include "eeg/prototype.hpp"
#include "eeg/report_json.hpp"
#include "eeg/server.hpp"
#include "eeg/types.hpp"
#include "eeg/wire.hpp"

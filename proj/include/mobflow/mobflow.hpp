#pragma once

#include "mobflow/cluster.hpp"
#include "mobflow/community.hpp"
#include "mobflow/diversity.hpp"
#include "mobflow/error.hpp"
#include "mobflow/flows.hpp"
#include "mobflow/ingest.hpp"
#include "mobflow/od.hpp"
#include "mobflow/pipeline.hpp"
#include "mobflow/synth.hpp"
#include "mobflow/territory.hpp"
#include "mobflow/time.hpp"

#pragma once

#include "linkage/corpus.hpp"
#include "linkage/data.hpp"
#include "linkage/detect.hpp"
#include "linkage/enumerate.hpp"
#include "linkage/error.hpp"
#include "linkage/familytests.hpp"
#include "linkage/genecount.hpp"
#include "linkage/likelihood.hpp"
#include "linkage/model.hpp"
#include "linkage/model_io.hpp"
#include "linkage/pedigree.hpp"
#include "linkage/peeling.hpp"
#include "linkage/sim.hpp"

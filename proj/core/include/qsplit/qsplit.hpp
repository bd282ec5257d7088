#pragma once

#include "qsplit/decomp.hpp"
#include "qsplit/error.hpp"
#include "qsplit/genlab.hpp"
#include "qsplit/numkit.hpp"
#include "qsplit/opmodel.hpp"

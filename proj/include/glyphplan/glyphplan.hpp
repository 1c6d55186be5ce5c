#pragma once

#include "glyphplan/alphabet.hpp"
#include "glyphplan/backend.hpp"
#include "glyphplan/bpe.hpp"
#include "glyphplan/dataprep.hpp"
#include "glyphplan/edit_session.hpp"
#include "glyphplan/error.hpp"
#include "glyphplan/eval.hpp"
#include "glyphplan/grammar.hpp"
#include "glyphplan/layout.hpp"
#include "glyphplan/planner.hpp"
#include "glyphplan/record_io.hpp"
#include "glyphplan/service.hpp"
#include "glyphplan/tokenizer.hpp"

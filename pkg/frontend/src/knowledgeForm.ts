// Row validation for the expert knowledge form. Invalid rows block the
// request entirely; errors are reported per row for inline display.

import type { KnowledgeEdgeRow } from './types.js';

export interface RowError {
  row: number;
  field: 'source' | 'label' | 'target';
  message: string;
}

export function validateRows(rows: KnowledgeEdgeRow[], author: string): RowError[] {
  const errors: RowError[] = [];
  rows.forEach((row, i) => {
    (['source', 'label', 'target'] as const).forEach((field) => {
      if (!row[field] || row[field].trim().length === 0) {
        errors.push({ row: i, field, message: `${field} is required` });
      }
    });
    if (row.source.trim().toLowerCase() === row.target.trim().toLowerCase()) {
      if (row.source.trim()) {
        errors.push({ row: i, field: 'target', message: 'source and target must differ' });
      }
    }
  });
  if (author.trim().length === 0) {
    errors.push({ row: -1, field: 'source', message: 'author is required' });
  }
  return errors;
}

export function canSubmit(rows: KnowledgeEdgeRow[], author: string): boolean {
  return rows.length > 0 && validateRows(rows, author).length === 0;
}

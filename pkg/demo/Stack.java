package demo.collections;

public class Stack<T> {
    private Object[] elements = new Object[16];
    private int size;

    /** Pushes an element onto the top of the stack. */
    public void push(T element) {
        if (size == elements.length) {
            grow();
        }
        elements[size++] = element;
    }

    /**
     * Pops the top element from the stack, or returns null when the stack is empty.
     */
    @SuppressWarnings("unchecked")
    public T pop() {
        if (size == 0) {
            return null;
        }
        T top = (T) elements[--size];
        elements[size] = null;
        return top;
    }

    // grow the elements array to twice its size
    private void grow() {
        Object[] bigger = new Object[elements.length * 2];
        System.arraycopy(elements, 0, bigger, 0, size);
        elements = bigger;
    }
}
